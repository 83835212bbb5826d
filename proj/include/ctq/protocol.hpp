#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctq/graph.hpp"
#include "ctq/symbolic.hpp"

namespace ctq {

/// Local-oscillator phases keyed by measured-mode name, in measurement order
/// (the order fixes photocurrent indices).
using PhaseSchedule = std::vector<std::pair<std::string, double>>;

std::optional<double> schedule_phase(const PhaseSchedule& schedule, const std::string& mode);

/// The protocol families supported on the canonical graphs.
///   CycleBca        twelve-node, a->10, b->8, c->9 (Bob-Alice-Charlie-Bob cycle)
///   CycleCab        twelve-node, opposite cycle, outputs 11, 12, 4
///   Pairwise        twelve-node, two senders exchange; canonical pair (a,b),
///                   other pairs obtained by the graph's 3-fold automorphism
///   MergeToCharlie  twelve-node, a and b both teleport to Charlie's nodes
///   SingleHop3      three-node weighted cluster, teleport a's input from the
///                   hub to node 2 or 3
///   OneDirectional2 two-node cluster, plain one-way teleportation
struct Scenario {
    enum class Kind { CycleBca, CycleCab, Pairwise, MergeToCharlie, SingleHop3, OneDirectional2 };

    Kind kind = Kind::CycleBca;
    char sender1 = 'a', sender2 = 'b';  // Pairwise
    bool measure_spectators = false;    // Pairwise: also measure the idle nodes
    int hop_target = 3;                 // SingleHop3: receiving node (2 or 3)
    std::string tag = "a";              // SingleHop3 / OneDirectional2 input tag

    static Scenario cycle_bca();
    static Scenario cycle_cab();
    static Scenario pairwise(char s1, char s2, bool spectators = false);
    static Scenario merge_to_charlie();
    static Scenario single_hop3(int target_node, std::string tag = "a");
    static Scenario one_directional2(std::string tag = "a");

    /// CLI names: bca, cab, pairwise-ab|bc|ca, merge, hop-a2, hop-a3, one-two.
    static Scenario from_name(const std::string& name);
    std::string name() const;
};

/// A fully explicit protocol: what to attach, what to measure at which phase,
/// which nodes carry the teleported states, and the input gain each output
/// quadrature is required to show. Weighted clusters teleport with a
/// weight-determined gain (1/g^2 on X, g^2 on Y for the three-node hop);
/// everywhere else the expected gain is exactly 1.
struct ProtocolSpec {
    std::string name = "custom";
    std::vector<std::pair<std::string, int>> attachments;  // input tag -> node
    PhaseSchedule schedule;
    std::vector<int> outputs;                              // scenario display order
    std::vector<std::pair<double, double>> expected_gains; // per output (X, Y); empty = all 1
};

/// The paper-faithful plan for a scenario on a given graph.
/// Throws Error{IncompatibleGraph} when the node count does not match.
ProtocolSpec scenario_plan(const Scenario& scenario, const ClusterGraph& graph);

/// Just the phases of the scenario's plan.
PhaseSchedule phase_schedule(const Scenario& scenario, const ClusterGraph& graph);

struct OutputQuadrature {
    std::string node;        // "8", or "2:3" inside a composite
    char quadrature = 'X';
    std::string input_tag;
    char input_quadrature = 'x';
    double input_gain = 0.0;
    std::vector<std::pair<std::string, double>> gains;  // photocurrent name -> coefficient
    Eigen::VectorXd error_row;
    double variance_coefficient = 0.0;
};

struct TeleportationReport {
    std::string scenario;
    int resource_count = 0;  // columns of the error matrix
    std::vector<std::pair<std::string, std::string>> routing;  // output node -> input tag
    std::vector<OutputQuadrature> outputs;  // all X rows first, then all Y rows
    Eigen::MatrixXd error_matrix;           // rows follow `outputs`
    Eigen::VectorXd variance_vector;        // rows follow `outputs`
    PhaseSchedule schedule;
    std::vector<std::pair<std::string, int>> attachments;

    const OutputQuadrature* find_output(const std::string& node, char quadrature) const;
};

/// End-to-end symbolic teleportation for an explicit protocol.
/// Throws Error{ProtocolBroken} when the system is singular, an output keeps
/// anti-squeezed or surplus input content, the input gain deviates from the
/// expected one, or a node's X and Y quadratures come from different senders.
TeleportationReport run_custom(const ClusterGraph& graph, const ProtocolSpec& spec);

/// run_custom on the paper's plan for the scenario.
TeleportationReport run_protocol(const ClusterGraph& graph, const Scenario& scenario);

/// diag(E (I+A^2)^-1 E^T): the per-row error-variance coefficients in units
/// of the squeezed-quadrature variance. Throws Error{DimensionMismatch}.
Eigen::VectorXd error_variances(const Eigen::MatrixXd& error_matrix, const ClusterGraph& graph);

/// Default candidate phases for the schedule search: multiples of pi/4 plus
/// +-arctan of every distinct nonzero weight, mapped into [0, pi).
/// (theta and theta+pi measure the same ray; only photocurrent signs differ.)
std::vector<double> default_phase_candidates(const ClusterGraph& graph);

/// Exhaustive search over candidate phase assignments for the measured set
/// (every mode that is neither consumed nor an output). Returns the first
/// schedule, in lexicographic candidate order, that teleports all outputs
/// cleanly with minimal total variance. Throws Error{NotFound}.
PhaseSchedule find_phase_schedule(const ClusterGraph& graph,
                                  const std::vector<std::pair<std::string, int>>& attachments,
                                  const std::vector<int>& output_nodes,
                                  const std::vector<double>& candidate_phases = {});

/// Concatenates reports of independent clusters into one protocol report:
/// block-diagonal error structure, routing keyed "<k>:<node>", variance
/// vector ordered all X entries then all Y entries. A single report is
/// returned unchanged. Throws Error{LabelCollision} on duplicate input tags.
TeleportationReport composite_report(const std::vector<TeleportationReport>& reports);

/// JSON document with routing, gains, error matrix and variance vector.
std::string report_to_json(const TeleportationReport& report, int indent = 2);

} // namespace ctq

#pragma once

#include <Eigen/Dense>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctq/errors.hpp"
#include "ctq/graph.hpp"

namespace ctq {

/// Basis of the exact-structure algebra: a quadrature operator is a real
/// linear combination of these labels. Input labels identify a participant's
/// teleported mode by tag; resource labels index the rescaled squeezed
/// oscillators 1..n; photocurrent labels index homodyne measurements in the
/// order they were performed.
enum class LabelKind { InputX, InputY, ResX, ResY, Photocurrent };

struct BasisLabel {
    LabelKind kind;
    int index = 0;      // resource node (1-based) or measurement index (0-based)
    std::string tag;    // participant tag for input labels, empty otherwise

    auto operator<=>(const BasisLabel&) const = default;
};

BasisLabel input_x(const std::string& tag);
BasisLabel input_y(const std::string& tag);
BasisLabel res_x(int node);
BasisLabel res_y(int node);
BasisLabel photocurrent(int k);

std::string label_name(const BasisLabel& label);

/// A quadrature operator as a sparse coefficient map. Coefficients with
/// magnitude below 1e-12 are pruned so structural zeros stay exact.
class QuadExpr {
public:
    static constexpr double kPruneTol = 1e-12;

    QuadExpr() = default;
    explicit QuadExpr(const BasisLabel& label, double coeff = 1.0) { set(label, coeff); }

    double coefficient(const BasisLabel& label) const;
    void set(const BasisLabel& label, double coeff);
    void add(const BasisLabel& label, double coeff);

    /// this += c * other
    void add_scaled(const QuadExpr& other, double c);
    QuadExpr scaled(double c) const;

    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::map<BasisLabel, double>& terms() const { return terms_; }

    /// Largest |coefficient| over labels of the given kind (0 when absent).
    double max_abs(LabelKind kind) const;

private:
    std::map<BasisLabel, double> terms_;
};

/// One homodyne measurement turned into an operator identity:
/// lhs == photocurrent (local oscillator amplitude normalized to 1).
struct LinearEquation {
    QuadExpr lhs;
    int photocurrent = 0;       // index of the rhs label
    std::string mode_name;      // measured mode, for reporting
    double theta = 0.0;
};

/// The evolving register of physical modes. Cluster nodes are named "1".."n";
/// a beam-splitter attachment of input `t` to node k replaces the node pair
/// (input, k) by modes "t_in" and "t_1". Measurement order fixes the
/// photocurrent indexing, so construction is sequential by design.
class ModeSystem {
public:
    struct Mode {
        std::string name;
        QuadExpr x, y;
        bool measured = false;
        bool consumed = false;  // absorbed into a beam splitter
    };

    /// Builds X_i = x_{r,i} - sum_j A_ij y_{r,j}, Y_i = y_{r,i} + sum_j A_ij x_{r,j}.
    static ModeSystem cluster_expressions(const ClusterGraph& graph);

    /// Symmetric beam splitter between a fresh input mode and an unmeasured
    /// node: adds modes "<tag>_in" = (input+node)/sqrt(2) and
    /// "<tag>_1" = (input-node)/sqrt(2); the node itself is consumed.
    /// Throws Error{NodeAlreadyMeasured} or Error{DuplicateInputTag}.
    void attach_input(const std::string& tag, int node);

    /// Homodyne measurement of mode `name` at local-oscillator phase theta:
    /// records cos(theta) X + sin(theta) Y = i_k and flags the mode measured.
    /// Returns the photocurrent index k. Throws Error{ModeAlreadyMeasured}.
    int homodyne_equation(const std::string& name, double theta);

    const Mode& mode(const std::string& name) const;
    bool has_mode(const std::string& name) const;
    const std::vector<Mode>& modes() const { return modes_; }
    const std::vector<LinearEquation>& equations() const { return equations_; }
    /// Measured mode names in photocurrent order.
    const std::vector<std::string>& photocurrent_modes() const { return photocurrent_modes_; }
    int node_count() const { return node_count_; }

private:
    Mode& mode_ref(const std::string& name);

    std::vector<Mode> modes_;
    std::map<std::string, std::size_t> index_;
    std::vector<LinearEquation> equations_;
    std::vector<std::string> photocurrent_modes_;
    std::set<std::string> tags_;
    int node_count_ = 0;
};

/// Solution of the measurement system for the anti-squeezed resource
/// quadratures: ResX label -> expression over inputs, ResY, photocurrents
/// and (when the system leaves degrees of freedom undetermined) the ResX
/// labels that could not be pivoted. Those must cancel in any teleported
/// output; classify_output reports them as a residual if they survive.
using SubstitutionMap = std::map<BasisLabel, QuadExpr>;

/// Gauss-Jordan elimination over the ResX columns with partial pivoting.
/// Throws Error{SingularSystem} when an equation row reduces to zero ResX
/// content (a redundant or degenerate measurement set).
SubstitutionMap solve_equations(const std::vector<LinearEquation>& equations);
SubstitutionMap solve_measurements(const ModeSystem& system);

QuadExpr substitute(const QuadExpr& expr, const SubstitutionMap& map);

/// Decomposition of a substituted output quadrature into teleported input,
/// classical feedforward and residual squeezed-quadrature error.
struct TeleportationTerm {
    bool clean = false;              // one input label with coefficient +1, no ResX left
    std::string input_tag;           // tag of the single surviving input label
    LabelKind input_kind = LabelKind::InputX;
    double input_gain = 0.0;         // its coefficient
    std::map<int, double> gains;     // photocurrent index -> coefficient
    Eigen::VectorXd error_row;       // ResY coefficients, length n
    QuadExpr reduced;                // the full substituted expression
    QuadExpr residual;               // ResX leftovers and surplus input labels
};

TeleportationTerm classify_output(const QuadExpr& expr, const SubstitutionMap& map,
                                  int node_count);

} // namespace ctq

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ctq/graph.hpp"
#include "ctq/protocol.hpp"

namespace ctq {

/// Deterministic standard-normal sampler (xorshift-free: mt19937_64 plus
/// Box-Muller) so seeded runs are bit-reproducible.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
    double operator()();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Gaussian state of n modes in the quadrature ordering (x_1..x_n, y_1..y_n).
/// Vacuum variance is 1/4 per quadrature, from [x, y] = i/2.
struct GaussianState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int modes() const { return static_cast<int>(mean.size()) / 2; }

    static GaussianState vacuum(int n);
    /// Minimum-uncertainty state squeezed in y: y-variance 10^(-s/10)/4 and
    /// x-variance 10^(s/10)/4 per mode.
    static GaussianState squeezed_vacuum(const std::vector<double>& s_db);

    /// Tensor product (this ⊗ other), other's modes appended.
    GaussianState append(const GaussianState& other) const;

    /// Symmetry, positive semidefiniteness and the per-mode uncertainty
    /// bound det >= 1/16 (within 1e-9).
    bool is_physical(double tol = 1e-9) const;
};

/// Linear quadrature transform preserving the commutation form
/// Omega = [[0, I], [-I, 0]]/2; construction validates S Omega S^T = Omega.
class SymplecticOp {
public:
    explicit SymplecticOp(Eigen::MatrixXd s);

    static SymplecticOp identity(int n);
    /// The cluster-generating transform [[C, -AC], [AC, C]], C = (I+A^2)^(-1/2).
    static SymplecticOp bogoliubov(const ClusterGraph& graph);
    /// Symmetric beam splitter between modes i and j (0-based) of an n-mode
    /// register: slot i <- (i+j)/sqrt(2), slot j <- (i-j)/sqrt(2).
    static SymplecticOp beam_splitter(int n, int i, int j);

    const Eigen::MatrixXd& matrix() const { return s_; }
    int modes() const { return static_cast<int>(s_.rows()) / 2; }

private:
    Eigen::MatrixXd s_;
};

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op);

struct HomodyneRecord {
    int mode = 0;
    double theta = 0.0;
    double marginal_mean = 0.0;
    double marginal_variance = 0.0;
    double outcome = 0.0;
};

/// Projective Gaussian conditioning on cos(theta) x_k + sin(theta) y_k = m.
/// The measured mode is removed from the returned state; its conditional
/// covariance never depends on the outcome. When no outcome is forced, m is
/// drawn from the marginal using the sampler.
std::pair<GaussianState, HomodyneRecord>
measure_homodyne(const GaussianState& state, int mode, double theta,
                 std::optional<double> outcome, NormalSampler& rng);

/// Phase-space displacement: mean += shift, covariance untouched.
GaussianState displace(const GaussianState& state, const Eigen::VectorXd& shift);

/// Per-input Gaussian state: coherent displacement plus optional squeezing.
struct InputState {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double squeeze_db = 0.0;
};
using InputSpec = std::map<std::string, InputState>;

struct ScenarioSimulation {
    std::vector<std::string> quadrature_names;  // symbolic report row order
    /// Variance of the feedforward-corrected outputs over the full outcome
    /// ensemble: conditional variance plus the spread of the residual
    /// conditional means. This is the teleportation channel's added-noise
    /// figure the symbolic coefficients predict.
    Eigen::VectorXd channel_variance;
    /// Schur-complement conditional variance given the sampled outcomes
    /// (outcome-independent by construction).
    Eigen::VectorXd conditional_variance;
    /// Conditional means after the feedforward displacement for the sampled
    /// outcome set.
    Eigen::VectorXd corrected_mean;
    std::vector<double> outcomes;
    TeleportationReport report;
};

/// Full numeric rerun of a scenario: builds the resource from squeezed
/// oscillators, attaches the inputs with beam-splitter symplectics, measures
/// the schedule sampling outcomes, and applies the symbolic report's
/// feedforward gains. Pass a precomputed report to skip the symbolic run
/// when simulating many outcome sets of one scenario.
ScenarioSimulation simulate_scenario(const ClusterGraph& graph, const Scenario& scenario,
                                     double s_db, const InputSpec& inputs = {},
                                     std::uint64_t seed = 42,
                                     const TeleportationReport* precomputed = nullptr);

/// Variances of the nullifiers Y_i - sum_j A_ij X_j on the generated resource
/// state; equals (I+A^2)_ii times the squeezed variance for a true cluster.
Eigen::VectorXd nullifier_variances(const ClusterGraph& graph, double s_db);

} // namespace ctq

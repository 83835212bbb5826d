#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctq/errors.hpp"

namespace ctq {

/// dB <-> variance conversion for the squeezed quadrature:
/// s = -10 log10(4 <dy^2>), so <dy^2> = 10^(-s/10)/4.
double variance_from_db(double s_db);
double db_from_variance(double variance);

struct SqueezingLevel {
    double db = 0.0;
    double variance = 0.25;

    static SqueezingLevel from_db(double s_db);
    static SqueezingLevel from_variance(double variance);
};

/// Per teleported state, the dimensionless (x, y) error-variance coefficients.
using ErrorProfile = std::vector<std::pair<double, double>>;

extern const ErrorProfile kProfileTwelve;   // (5,3) x3, the published cyclic vector
extern const ErrorProfile kProfileTwo;      // (2,2) x3, six two-node clusters
ErrorProfile three_node_profile(double g);  // (2+1/g^2, 1+g^2) x3

/// Probability that the displacement-error correction fails for at least one
/// teleported quadrature: 1 minus a product of erf factors, one per
/// quadrature, with fixed offsets (sqrt(5)+1)/2 on x and sqrt(5)+1 on y from
/// the correction sequence. Result clamped to [0, 1].
double protocol_error_probability(const ErrorProfile& profile, const SqueezingLevel& level);

struct WeightOptimum {
    double g = 1.0;
    double p = 0.0;
};

/// Minimizes the three-node-profile error probability over g in [0.2, 5] by
/// golden-section search (bracketed on a coarse grid first, dense-grid
/// fallback if bracketing fails) to a bracket width of 1e-4.
WeightOptimum optimize_weight(double s_db);

/// Exact crossover weights of the componentwise comparison
/// (2+1/g^2, 1+g^2) < (5, 3): returns (1/sqrt(3), sqrt(2)).
std::pair<double, double> dominance_interval();

/// Componentwise comparison of the three-node profile at weight g against a
/// reference (x, y) error pair; defaults to the published cyclic pair (5, 3).
bool three_node_dominates(double g, std::pair<double, double> reference = {5.0, 3.0});

struct SweepRow {
    double s_db = 0.0;
    double p_twelve = 0.0;
    double p_three_g1 = 0.0;
    double p_two = 0.0;
};

/// Error-probability table over squeezing degrees for the three protocol
/// implementations (profiles (5,3)x3, (3,2)x3, (2,2)x3).
std::vector<SweepRow> sweep_comparison(double s_min, double s_max, double step);

/// CSV with header s,p_twelve,p_three_g1,p_two at full double precision.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Atomic write: temp file in the target directory, renamed on success.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

} // namespace ctq

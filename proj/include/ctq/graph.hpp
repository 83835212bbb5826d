#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "ctq/errors.hpp"

namespace ctq {

/// Weighted cluster-state graph. The weight matrix is symmetric with zero
/// diagonal; entry (i,j) is the weight coefficient of the edge between
/// oscillators i and j. Node indices are 1-based on every public surface.
class ClusterGraph {
public:
    /// Validates and adopts a weight matrix.
    /// Throws Error{NotSymmetric} or Error{NonzeroDiagonal}.
    static ClusterGraph validated(Eigen::MatrixXd weights);

    /// The twelve-node resource graph used by the cyclic, pairwise and
    /// merge protocols (weights +1/-1).
    static ClusterGraph twelve();

    /// Three-node weighted graph with edge weights g12, g13, g23.
    static ClusterGraph three(double g12, double g13, double g23);

    /// Two-node graph with a single unweighted edge.
    static ClusterGraph two();

    int node_count() const { return static_cast<int>(weights_.rows()); }

    /// Weight of edge (i,j), 1-based.
    double weight(int i, int j) const { return weights_(i - 1, j - 1); }

    const Eigen::MatrixXd& weights() const { return weights_; }

    /// Plain-text format: first line n, then n rows of n space-separated reals.
    static ClusterGraph parse(std::istream& in);
    static ClusterGraph load(const std::string& path);
    std::string serialize() const;
    void save(const std::string& path) const;

private:
    explicit ClusterGraph(Eigen::MatrixXd w) : weights_(std::move(w)) {}

    Eigen::MatrixXd weights_;
};

/// The SPD matrices derived from a graph: I+A^2, its inverse and its inverse
/// symmetric square root. (I+A^2)^(-1/2) is the scaling factor of the
/// Bogoliubov transform; (I+A^2)^(-1) is the covariance of the rescaled
/// squeezed quadratures and therefore the metric of every error variance.
struct GramKit {
    Eigen::MatrixXd gram;
    Eigen::MatrixXd gram_inverse;
    Eigen::MatrixXd gram_inv_sqrt;
};

GramKit gram_kit(const ClusterGraph& graph);

/// Symmetric square root of an SPD matrix via eigendecomposition.
/// Throws Error{NotPositiveDefinite} when an eigenvalue is <= 0.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m);

} // namespace ctq

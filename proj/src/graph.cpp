#include "ctq/graph.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ctq {

namespace {

constexpr double kSymmetryTol = 1e-12;

} // namespace

ClusterGraph ClusterGraph::validated(Eigen::MatrixXd weights) {
    if (weights.rows() != weights.cols() || weights.rows() < 1)
        throw Error(ErrorCode::InvalidArgument, "weight matrix must be square and non-empty");
    if (!weights.allFinite())
        throw Error(ErrorCode::InvalidArgument, "weight matrix must be finite");
    const auto n = weights.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(weights(i, i)) > kSymmetryTol)
            throw Error(ErrorCode::NonzeroDiagonal,
                        "diagonal entry (" + std::to_string(i + 1) + "," + std::to_string(i + 1) +
                            ") = " + std::to_string(weights(i, i)) + " is not zero");
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(weights(i, j) - weights(j, i)) > kSymmetryTol)
                throw Error(ErrorCode::NotSymmetric,
                            "entries (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                ") and transpose differ");
        }
    }
    return ClusterGraph(std::move(weights));
}

ClusterGraph ClusterGraph::twelve() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(12, 12);
    const struct { int i, j; double w; } edges[] = {
        {1, 2, 1},  {1, 3, 1},  {1, 7, 1},  {2, 3, 1},  {2, 5, 1},
        {3, 6, 1},  {4, 8, 1},  {5, 8, 1},  {6, 9, 1},  {7, 10, 1},
        {8, 9, -1}, {8, 10, -1}, {9, 10, -1}, {9, 11, 1}, {10, 12, 1},
    };
    for (const auto& e : edges) {
        a(e.i - 1, e.j - 1) = e.w;
        a(e.j - 1, e.i - 1) = e.w;
    }
    return ClusterGraph(std::move(a));
}

ClusterGraph ClusterGraph::three(double g12, double g13, double g23) {
    Eigen::MatrixXd a(3, 3);
    a << 0, g12, g13,
         g12, 0, g23,
         g13, g23, 0;
    return validated(std::move(a));
}

ClusterGraph ClusterGraph::two() {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1,
         1, 0;
    return ClusterGraph(std::move(a));
}

ClusterGraph ClusterGraph::parse(std::istream& in) {
    int n = 0;
    if (!(in >> n) || n < 1)
        throw Error(ErrorCode::Io, "graph file must start with a positive node count");
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(in >> w(i, j)))
                throw Error(ErrorCode::Io, "graph file truncated at row " + std::to_string(i + 1));
    return validated(std::move(w));
}

ClusterGraph ClusterGraph::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open graph file: " + path);
    return parse(in);
}

std::string ClusterGraph::serialize() const {
    std::ostringstream out;
    const int n = node_count();
    out << n << "\n";
    char buf[32];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", weights_(i, j));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    }
    return out.str();
}

void ClusterGraph::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write graph file: " + path);
    out << serialize();
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::EigendecompositionFailure, "eigendecomposition did not converge");
    const Eigen::VectorXd& ev = es.eigenvalues();
    if ((ev.array() <= 0.0).any())
        throw Error(ErrorCode::NotPositiveDefinite,
                    "matrix has a non-positive eigenvalue: " + std::to_string(ev.minCoeff()));
    return es.eigenvectors() * ev.array().sqrt().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

GramKit gram_kit(const ClusterGraph& graph) {
    const Eigen::MatrixXd& a = graph.weights();
    const auto n = a.rows();
    GramKit kit;
    kit.gram = Eigen::MatrixXd::Identity(n, n) + a * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kit.gram);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::EigendecompositionFailure, "eigendecomposition did not converge");
    // Eigenvalues of I+A^2 are >= 1, so both inverse powers are well defined.
    const Eigen::VectorXd& ev = es.eigenvalues();
    const Eigen::MatrixXd& v = es.eigenvectors();
    kit.gram_inverse = v * ev.array().inverse().matrix().asDiagonal() * v.transpose();
    kit.gram_inv_sqrt = v * ev.array().rsqrt().matrix().asDiagonal() * v.transpose();
    return kit;
}

} // namespace ctq

#include "ctq/covsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ctq {

namespace {

constexpr double kVacuumVariance = 0.25;  // from [x, y] = i/2
constexpr double kSymplecticTol = 1e-9;

Eigen::MatrixXd commutation_form(int n) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    omega.topRightCorner(n, n) = 0.5 * Eigen::MatrixXd::Identity(n, n);
    omega.bottomLeftCorner(n, n) = -0.5 * Eigen::MatrixXd::Identity(n, n);
    return omega;
}

std::pair<double, double> squeezed_variances(double s_db) {
    const double v_y = std::pow(10.0, -s_db / 10.0) * kVacuumVariance;
    const double v_x = std::pow(10.0, s_db / 10.0) * kVacuumVariance;
    return {v_x, v_y};
}

} // namespace

double NormalSampler::operator()() {
    if (spare_) {
        const double z = *spare_;
        spare_.reset();
        return z;
    }
    // Box-Muller on explicit uniforms keeps seeded streams reproducible.
    const double scale = 1.0 / (static_cast<double>(engine_.max()) + 1.0);
    double u1 = 0.0;
    do {
        u1 = (static_cast<double>(engine_()) + 0.5) * scale;
    } while (u1 <= 0.0);
    const double u2 = (static_cast<double>(engine_()) + 0.5) * scale;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    return r * std::cos(phi);
}

GaussianState GaussianState::vacuum(int n) {
    GaussianState st;
    st.mean = Eigen::VectorXd::Zero(2 * n);
    st.cov = kVacuumVariance * Eigen::MatrixXd::Identity(2 * n, 2 * n);
    return st;
}

GaussianState GaussianState::squeezed_vacuum(const std::vector<double>& s_db) {
    const int n = static_cast<int>(s_db.size());
    GaussianState st = vacuum(n);
    for (int i = 0; i < n; ++i) {
        const auto [v_x, v_y] = squeezed_variances(s_db[i]);
        st.cov(i, i) = v_x;
        st.cov(n + i, n + i) = v_y;
    }
    return st;
}

GaussianState GaussianState::append(const GaussianState& other) const {
    const int n = modes(), m = other.modes();
    GaussianState st;
    st.mean = Eigen::VectorXd::Zero(2 * (n + m));
    st.cov = Eigen::MatrixXd::Zero(2 * (n + m), 2 * (n + m));
    // interleave the x blocks and y blocks of both registers
    std::vector<int> src_this(2 * n), src_other(2 * m);
    for (int i = 0; i < n; ++i) {
        src_this[i] = i;
        src_this[n + i] = n + m + i;
    }
    for (int i = 0; i < m; ++i) {
        src_other[i] = n + i;
        src_other[m + i] = 2 * n + m + i;
    }
    for (int i = 0; i < 2 * n; ++i)
        st.mean(src_this[i]) = mean(i);
    for (int i = 0; i < 2 * m; ++i)
        st.mean(src_other[i]) = other.mean(i);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j)
            st.cov(src_this[i], src_this[j]) = cov(i, j);
    for (int i = 0; i < 2 * m; ++i)
        for (int j = 0; j < 2 * m; ++j)
            st.cov(src_other[i], src_other[j]) = other.cov(i, j);
    return st;
}

bool GaussianState::is_physical(double tol) const {
    const int n = modes();
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.eigenvalues().minCoeff() < -tol)
        return false;
    for (int i = 0; i < n; ++i) {
        const double det = cov(i, i) * cov(n + i, n + i) - cov(i, n + i) * cov(i, n + i);
        if (det < 1.0 / 16.0 - tol)
            return false;
    }
    return true;
}

SymplecticOp::SymplecticOp(Eigen::MatrixXd s) : s_(std::move(s)) {
    if (s_.rows() != s_.cols() || s_.rows() % 2 != 0)
        throw Error(ErrorCode::NotSymplectic, "symplectic matrix must be square of even size");
    const int n = static_cast<int>(s_.rows()) / 2;
    const Eigen::MatrixXd omega = commutation_form(n);
    const double defect = (s_ * omega * s_.transpose() - omega).cwiseAbs().maxCoeff();
    if (defect > kSymplecticTol)
        throw Error(ErrorCode::NotSymplectic,
                    "S Omega S^T deviates from Omega by " + std::to_string(defect));
}

SymplecticOp SymplecticOp::identity(int n) {
    return SymplecticOp(Eigen::MatrixXd::Identity(2 * n, 2 * n));
}

SymplecticOp SymplecticOp::bogoliubov(const ClusterGraph& graph) {
    const int n = graph.node_count();
    const Eigen::MatrixXd c = gram_kit(graph).gram_inv_sqrt;
    const Eigen::MatrixXd ac = graph.weights() * c;
    Eigen::MatrixXd s(2 * n, 2 * n);
    s.topLeftCorner(n, n) = c;
    s.topRightCorner(n, n) = -ac;
    s.bottomLeftCorner(n, n) = ac;
    s.bottomRightCorner(n, n) = c;
    return SymplecticOp(std::move(s));
}

SymplecticOp SymplecticOp::beam_splitter(int n, int i, int j) {
    if (i == j || i < 0 || j < 0 || i >= n || j >= n)
        throw Error(ErrorCode::InvalidArgument, "beam splitter needs two distinct modes");
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    const double r = 1.0 / std::sqrt(2.0);
    for (int block : {0, n}) {
        s(block + i, block + i) = r;
        s(block + i, block + j) = r;
        s(block + j, block + i) = r;
        s(block + j, block + j) = -r;
    }
    return SymplecticOp(std::move(s));
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op) {
    if (op.modes() != state.modes())
        throw Error(ErrorCode::DimensionMismatch, "symplectic and state mode counts differ");
    GaussianState out;
    out.mean = op.matrix() * state.mean;
    out.cov = op.matrix() * state.cov * op.matrix().transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

std::pair<GaussianState, HomodyneRecord>
measure_homodyne(const GaussianState& state, int mode, double theta,
                 std::optional<double> outcome, NormalSampler& rng) {
    const int n = state.modes();
    if (mode < 0 || mode >= n)
        throw Error(ErrorCode::InvalidArgument, "measured mode out of range");

    Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n);
    c(mode) = std::cos(theta);
    c(n + mode) = std::sin(theta);

    HomodyneRecord rec;
    rec.mode = mode;
    rec.theta = theta;
    rec.marginal_variance = c.dot(state.cov * c);
    rec.marginal_mean = c.dot(state.mean);
    if (rec.marginal_variance < 1e-12)
        throw Error(ErrorCode::DegenerateMarginal,
                    "measured quadrature has (near) zero variance");
    rec.outcome = outcome ? *outcome
                          : rec.marginal_mean + std::sqrt(rec.marginal_variance) * rng();

    const Eigen::VectorXd sigma_c = state.cov * c;
    const Eigen::VectorXd gain = sigma_c / rec.marginal_variance;
    Eigen::VectorXd mean = state.mean + gain * (rec.outcome - rec.marginal_mean);
    Eigen::MatrixXd cov = state.cov - sigma_c * sigma_c.transpose() / rec.marginal_variance;

    std::vector<int> keep;
    keep.reserve(2 * (n - 1));
    for (int i = 0; i < n; ++i)
        if (i != mode)
            keep.push_back(i);
    for (int i = 0; i < n; ++i)
        if (i != mode)
            keep.push_back(n + i);

    GaussianState out;
    out.mean = mean(keep);
    out.cov = cov(keep, keep);
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return {std::move(out), rec};
}

GaussianState displace(const GaussianState& state, const Eigen::VectorXd& shift) {
    if (shift.size() != state.mean.size())
        throw Error(ErrorCode::DimensionMismatch, "displacement length mismatch");
    if (!shift.allFinite())
        throw Error(ErrorCode::InvalidArgument, "displacement must be finite");
    GaussianState out = state;
    out.mean += shift;
    return out;
}

Eigen::VectorXd nullifier_variances(const ClusterGraph& graph, double s_db) {
    const int n = graph.node_count();
    GaussianState resource = GaussianState::squeezed_vacuum(std::vector<double>(n, s_db));
    resource = apply_symplectic(resource, SymplecticOp::bogoliubov(graph));
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * n);
        w(n + i) = 1.0;
        for (int j = 0; j < n; ++j)
            w(j) -= graph.weight(i + 1, j + 1);
        out(i) = w.dot(resource.cov * w);
    }
    return out;
}

ScenarioSimulation simulate_scenario(const ClusterGraph& graph, const Scenario& scenario,
                                     double s_db, const InputSpec& inputs, std::uint64_t seed,
                                     const TeleportationReport* precomputed) {
    ScenarioSimulation sim;
    sim.report = precomputed ? *precomputed : run_protocol(graph, scenario);

    const int n = graph.node_count();
    GaussianState state = GaussianState::squeezed_vacuum(std::vector<double>(n, s_db));
    state = apply_symplectic(state, SymplecticOp::bogoliubov(graph));

    // Mode registry: cluster nodes occupy slots 0..n-1 under their node name;
    // each attachment appends one input mode and the beam splitter leaves
    // "<tag>_in" in the input slot and "<tag>_1" in the node slot.
    std::map<std::string, int> slot;
    for (int i = 1; i <= n; ++i)
        slot[std::to_string(i)] = i - 1;
    for (const auto& [tag, node] : sim.report.attachments) {
        InputState in;
        if (auto it = inputs.find(tag); it != inputs.end())
            in = it->second;
        GaussianState input_mode = GaussianState::squeezed_vacuum({in.squeeze_db});
        input_mode.mean << in.mean_x, in.mean_y;
        const int input_slot = state.modes();
        state = state.append(input_mode);
        state = apply_symplectic(
            state, SymplecticOp::beam_splitter(state.modes(), input_slot, slot.at(std::to_string(node))));
        slot[tag + "_in"] = input_slot;
        slot[tag + "_1"] = slot.at(std::to_string(node));
        slot.erase(std::to_string(node));
    }

    const int m = state.modes();
    const int n_meas = static_cast<int>(sim.report.schedule.size());

    // Selectors of the measured quadratures and of the report's outputs,
    // all in the full pre-measurement register.
    auto selector = [m](int mode_slot, double theta) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * m);
        c(mode_slot) = std::cos(theta);
        c(m + mode_slot) = std::sin(theta);
        return c;
    };
    Eigen::MatrixXd selectors(2 * m, n_meas);
    std::map<std::string, int> measurement_index;
    for (int k = 0; k < n_meas; ++k) {
        const auto& [name, theta] = sim.report.schedule[k];
        selectors.col(k) = selector(slot.at(name), theta);
        measurement_index[name] = k;
    }

    const auto n_rows = sim.report.outputs.size();
    Eigen::MatrixXd out_selectors(2 * m, static_cast<Eigen::Index>(n_rows));
    Eigen::MatrixXd gain_matrix = Eigen::MatrixXd::Zero(n_meas, static_cast<Eigen::Index>(n_rows));
    for (std::size_t r = 0; r < n_rows; ++r) {
        const OutputQuadrature& q = sim.report.outputs[r];
        const int s = slot.at(q.node);
        Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * m);
        w(q.quadrature == 'X' ? s : m + s) = 1.0;
        out_selectors.col(static_cast<Eigen::Index>(r)) = w;
        for (const auto& [gname, coeff] : q.gains)
            gain_matrix(measurement_index.at(gname.substr(2)), static_cast<Eigen::Index>(r)) = coeff;
        sim.quadrature_names.push_back(std::string(1, q.quadrature) + q.node);
    }

    // Ensemble variance of the corrected outputs, w_c = w - C gamma, on the
    // pre-measurement state: Var(out - sum_k gamma_k i_k).
    sim.channel_variance.resize(static_cast<Eigen::Index>(n_rows));
    for (std::size_t r = 0; r < n_rows; ++r) {
        const Eigen::VectorXd wc = out_selectors.col(static_cast<Eigen::Index>(r)) -
                                   selectors * gain_matrix.col(static_cast<Eigen::Index>(r));
        sim.channel_variance(static_cast<Eigen::Index>(r)) = wc.dot(state.cov * wc);
    }

    // Sequential sampled path: condition mode by mode, then displace by the
    // feedforward gains. Mode removal shifts slots, so track the live list.
    NormalSampler rng(seed);
    std::vector<std::string> live(m);
    for (const auto& [name, s] : slot)
        live[s] = name;
    GaussianState conditioned = state;
    sim.outcomes.reserve(n_meas);
    for (const auto& [name, theta] : sim.report.schedule) {
        const int current =
            static_cast<int>(std::find(live.begin(), live.end(), name) - live.begin());
        auto [next, rec] = measure_homodyne(conditioned, current, theta, std::nullopt, rng);
        conditioned = std::move(next);
        live.erase(live.begin() + current);
        sim.outcomes.push_back(rec.outcome);
    }

    const int remaining = conditioned.modes();
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(2 * remaining);
    sim.conditional_variance.resize(static_cast<Eigen::Index>(n_rows));
    std::vector<int> quad_index(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const OutputQuadrature& q = sim.report.outputs[r];
        const int s =
            static_cast<int>(std::find(live.begin(), live.end(), q.node) - live.begin());
        const int idx = q.quadrature == 'X' ? s : remaining + s;
        quad_index[r] = idx;
        sim.conditional_variance(static_cast<Eigen::Index>(r)) = conditioned.cov(idx, idx);
        double correction = 0.0;
        for (int k = 0; k < n_meas; ++k)
            correction -= gain_matrix(k, static_cast<Eigen::Index>(r)) * sim.outcomes[k];
        shift(idx) += correction;
    }
    const GaussianState displaced = displace(conditioned, shift);
    sim.corrected_mean.resize(static_cast<Eigen::Index>(n_rows));
    for (std::size_t r = 0; r < n_rows; ++r)
        sim.corrected_mean(static_cast<Eigen::Index>(r)) = displaced.mean(quad_index[r]);

    return sim;
}

} // namespace ctq

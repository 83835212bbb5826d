#include "ctq/symbolic.hpp"

#include <cmath>

namespace ctq {

namespace {

constexpr double kStructuralTol = 1e-9;

} // namespace

BasisLabel input_x(const std::string& tag) { return {LabelKind::InputX, 0, tag}; }
BasisLabel input_y(const std::string& tag) { return {LabelKind::InputY, 0, tag}; }
BasisLabel res_x(int node) { return {LabelKind::ResX, node, {}}; }
BasisLabel res_y(int node) { return {LabelKind::ResY, node, {}}; }
BasisLabel photocurrent(int k) { return {LabelKind::Photocurrent, k, {}}; }

std::string label_name(const BasisLabel& label) {
    switch (label.kind) {
    case LabelKind::InputX: return "x_" + label.tag;
    case LabelKind::InputY: return "y_" + label.tag;
    case LabelKind::ResX: return "xr_" + std::to_string(label.index);
    case LabelKind::ResY: return "yr_" + std::to_string(label.index);
    case LabelKind::Photocurrent: return "i_" + std::to_string(label.index);
    }
    return "?";
}

double QuadExpr::coefficient(const BasisLabel& label) const {
    auto it = terms_.find(label);
    return it == terms_.end() ? 0.0 : it->second;
}

void QuadExpr::set(const BasisLabel& label, double coeff) {
    if (std::abs(coeff) < kPruneTol)
        terms_.erase(label);
    else
        terms_[label] = coeff;
}

void QuadExpr::add(const BasisLabel& label, double coeff) {
    set(label, coefficient(label) + coeff);
}

void QuadExpr::add_scaled(const QuadExpr& other, double c) {
    for (const auto& [label, coeff] : other.terms_)
        add(label, c * coeff);
}

QuadExpr QuadExpr::scaled(double c) const {
    QuadExpr out;
    for (const auto& [label, coeff] : terms_)
        out.set(label, c * coeff);
    return out;
}

double QuadExpr::max_abs(LabelKind kind) const {
    double m = 0.0;
    for (const auto& [label, coeff] : terms_)
        if (label.kind == kind)
            m = std::max(m, std::abs(coeff));
    return m;
}

ModeSystem ModeSystem::cluster_expressions(const ClusterGraph& graph) {
    ModeSystem sys;
    const int n = graph.node_count();
    sys.node_count_ = n;
    sys.modes_.reserve(n);
    for (int i = 1; i <= n; ++i) {
        Mode m;
        m.name = std::to_string(i);
        m.x.set(res_x(i), 1.0);
        m.y.set(res_y(i), 1.0);
        for (int j = 1; j <= n; ++j) {
            const double w = graph.weight(i, j);
            if (w != 0.0) {
                m.x.add(res_y(j), -w);
                m.y.add(res_x(j), w);
            }
        }
        sys.index_[m.name] = sys.modes_.size();
        sys.modes_.push_back(std::move(m));
    }
    return sys;
}

ModeSystem::Mode& ModeSystem::mode_ref(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end())
        throw Error(ErrorCode::InvalidArgument, "unknown mode: " + name);
    return modes_[it->second];
}

const ModeSystem::Mode& ModeSystem::mode(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw Error(ErrorCode::InvalidArgument, "unknown mode: " + name);
    return modes_[it->second];
}

bool ModeSystem::has_mode(const std::string& name) const {
    return index_.count(name) != 0;
}

void ModeSystem::attach_input(const std::string& tag, int node) {
    if (tags_.count(tag))
        throw Error(ErrorCode::DuplicateInputTag, "input tag already attached: " + tag);
    Mode& target = mode_ref(std::to_string(node));
    if (target.measured || target.consumed)
        throw Error(ErrorCode::NodeAlreadyMeasured,
                    "node " + target.name + " is no longer available");

    const double s = 1.0 / std::sqrt(2.0);
    Mode sum, diff;
    sum.name = tag + "_in";
    diff.name = tag + "_1";
    sum.x.set(input_x(tag), 1.0);
    sum.y.set(input_y(tag), 1.0);
    diff.x = sum.x;
    diff.y = sum.y;
    sum.x.add_scaled(target.x, 1.0);
    sum.y.add_scaled(target.y, 1.0);
    diff.x.add_scaled(target.x, -1.0);
    diff.y.add_scaled(target.y, -1.0);
    sum.x = sum.x.scaled(s);
    sum.y = sum.y.scaled(s);
    diff.x = diff.x.scaled(s);
    diff.y = diff.y.scaled(s);

    target.consumed = true;
    tags_.insert(tag);
    for (Mode* m : {&sum, &diff}) {
        if (index_.count(m->name))
            throw Error(ErrorCode::DuplicateInputTag, "mode name collision: " + m->name);
        index_[m->name] = modes_.size();
        modes_.push_back(std::move(*m));
    }
}

int ModeSystem::homodyne_equation(const std::string& name, double theta) {
    Mode& m = mode_ref(name);
    if (m.measured || m.consumed)
        throw Error(ErrorCode::ModeAlreadyMeasured, "mode already measured: " + name);
    LinearEquation eq;
    eq.lhs.add_scaled(m.x, std::cos(theta));
    eq.lhs.add_scaled(m.y, std::sin(theta));
    eq.photocurrent = static_cast<int>(photocurrent_modes_.size());
    eq.mode_name = name;
    eq.theta = theta;
    m.measured = true;
    photocurrent_modes_.push_back(name);
    equations_.push_back(std::move(eq));
    return static_cast<int>(photocurrent_modes_.size()) - 1;
}

SubstitutionMap solve_equations(const std::vector<LinearEquation>& equations) {
    // Collect the ResX labels spanned by the system; they are the unknowns.
    std::map<BasisLabel, int> column;
    for (const auto& eq : equations)
        for (const auto& [label, coeff] : eq.lhs.terms())
            if (label.kind == LabelKind::ResX)
                column.emplace(label, 0);
    int c = 0;
    std::vector<BasisLabel> labels;
    for (auto& [label, idx] : column) {
        idx = c++;
        labels.push_back(label);
    }

    const int m = static_cast<int>(equations.size());
    const int n = static_cast<int>(labels.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
    std::vector<QuadExpr> rest(m);  // everything moved to the right-hand side
    for (int r = 0; r < m; ++r) {
        for (const auto& [label, coeff] : equations[r].lhs.terms()) {
            if (label.kind == LabelKind::ResX)
                a(r, column[label]) = coeff;
            else
                rest[r].add(label, -coeff);
        }
        rest[r].add(photocurrent(equations[r].photocurrent), 1.0);
    }

    // Gauss-Jordan over the ResX columns, partial pivoting on the rows.
    std::vector<int> pivot_row(n, -1);
    std::vector<bool> row_used(m, false);
    for (int col = 0; col < n; ++col) {
        int best = -1;
        for (int r = 0; r < m; ++r)
            if (!row_used[r] && (best < 0 || std::abs(a(r, col)) > std::abs(a(best, col))))
                best = r;
        if (best < 0 || std::abs(a(best, col)) < kStructuralTol)
            continue;  // free unknown
        row_used[best] = true;
        pivot_row[col] = best;
        const double inv = 1.0 / a(best, col);
        a.row(best) *= inv;
        rest[best] = rest[best].scaled(inv);
        for (int r = 0; r < m; ++r) {
            if (r == best)
                continue;
            const double f = a(r, col);
            if (std::abs(f) < QuadExpr::kPruneTol)
                continue;
            a.row(r) -= f * a.row(best);
            rest[r].add_scaled(rest[best], -f);
        }
    }

    for (int r = 0; r < m; ++r) {
        if (!row_used[r]) {
            const double residual = n > 0 ? a.row(r).cwiseAbs().maxCoeff() : 0.0;
            if (residual < kStructuralTol)
                throw Error(ErrorCode::SingularSystem,
                            "measurement of " + equations[r].mode_name +
                                " adds no independent anti-squeezed content (rank-deficient system)");
        }
    }

    SubstitutionMap map;
    for (int col = 0; col < n; ++col) {
        const int r = pivot_row[col];
        if (r < 0)
            continue;
        QuadExpr e = rest[r];
        for (int c2 = 0; c2 < n; ++c2)
            if (c2 != col && std::abs(a(r, c2)) >= QuadExpr::kPruneTol)
                e.add(labels[c2], -a(r, c2));
        map.emplace(labels[col], std::move(e));
    }
    return map;
}

SubstitutionMap solve_measurements(const ModeSystem& system) {
    return solve_equations(system.equations());
}

QuadExpr substitute(const QuadExpr& expr, const SubstitutionMap& map) {
    QuadExpr out;
    for (const auto& [label, coeff] : expr.terms()) {
        auto it = map.find(label);
        if (it == map.end())
            out.add(label, coeff);
        else
            out.add_scaled(it->second, coeff);
    }
    return out;
}

TeleportationTerm classify_output(const QuadExpr& expr, const SubstitutionMap& map,
                                  int node_count) {
    TeleportationTerm term;
    term.reduced = substitute(expr, map);
    term.error_row = Eigen::VectorXd::Zero(node_count);

    int input_labels = 0;
    for (const auto& [label, coeff] : term.reduced.terms()) {
        switch (label.kind) {
        case LabelKind::InputX:
        case LabelKind::InputY:
            ++input_labels;
            if (input_labels == 1) {
                term.input_tag = label.tag;
                term.input_kind = label.kind;
                term.input_gain = coeff;
            } else {
                term.residual.add(label, coeff);
            }
            break;
        case LabelKind::ResX:
            term.residual.add(label, coeff);
            break;
        case LabelKind::ResY:
            term.error_row(label.index - 1) = coeff;
            break;
        case LabelKind::Photocurrent:
            term.gains[label.index] = coeff;
            break;
        }
    }

    term.clean = input_labels == 1 && std::abs(term.input_gain - 1.0) < kStructuralTol &&
                 term.residual.empty();
    return term;
}

} // namespace ctq

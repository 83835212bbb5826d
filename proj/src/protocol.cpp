#include "ctq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ctq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGainTol = 1e-9;

// Order-3 automorphism of the twelve-node graph rotating the participants
// a -> b -> c -> a; composed with the tag rotation it transports the
// canonical (a,b) pairwise plan to the other sender pairs.
constexpr int kSigma[13] = {0, 2, 3, 1, 11, 6, 7, 5, 9, 10, 8, 12, 4};

int apply_sigma(int node, int times) {
    for (int t = 0; t < times; ++t)
        node = kSigma[node];
    return node;
}

char rotate_tag(char tag, int times) {
    for (int t = 0; t < times; ++t)
        tag = tag == 'a' ? 'b' : tag == 'b' ? 'c' : 'a';
    return tag;
}

void require_nodes(const Scenario& scenario, const ClusterGraph& graph, int n) {
    if (graph.node_count() != n)
        throw Error(ErrorCode::IncompatibleGraph,
                    scenario.name() + " needs a " + std::to_string(n) + "-node graph, got " +
                        std::to_string(graph.node_count()) + " nodes");
}

ProtocolSpec pairwise_base_plan() {
    ProtocolSpec spec;
    spec.attachments = {{"a", 1}, {"b", 2}};
    spec.schedule = {{"a_in", kPi / 4}, {"a_1", 3 * kPi / 4}, {"b_in", 0.0}, {"b_1", kPi / 2},
                     {"4", 0.0},        {"5", kPi / 2},       {"6", kPi / 2}, {"7", kPi / 2},
                     {"10", kPi / 2}};
    spec.outputs = {8, 12};
    return spec;
}

const std::vector<std::pair<std::string, double>> kPairwiseSpectators = {
    {"3", kPi / 2}, {"9", 0.0}, {"11", 0.0}};

ProtocolSpec transport_pairwise(int times, bool spectators) {
    ProtocolSpec base = pairwise_base_plan();
    ProtocolSpec out;
    for (const auto& [tag, node] : base.attachments)
        out.attachments.emplace_back(std::string(1, rotate_tag(tag[0], times)),
                                     apply_sigma(node, times));
    auto transport_name = [&](const std::string& name) -> std::string {
        if (std::isdigit(static_cast<unsigned char>(name[0])))
            return std::to_string(apply_sigma(std::stoi(name), times));
        return std::string(1, rotate_tag(name[0], times)) + name.substr(1);
    };
    for (const auto& [name, theta] : base.schedule)
        out.schedule.emplace_back(transport_name(name), theta);
    if (spectators)
        for (const auto& [name, theta] : kPairwiseSpectators)
            out.schedule.emplace_back(transport_name(name), theta);
    for (int node : base.outputs)
        out.outputs.push_back(apply_sigma(node, times));
    return out;
}

std::string residual_description(const TeleportationTerm& term) {
    if (term.input_tag.empty())
        return "no teleported input label";
    std::ostringstream os;
    os << "input " << (term.input_kind == LabelKind::InputX ? "x_" : "y_") << term.input_tag
       << " gain " << term.input_gain;
    if (!term.residual.empty()) {
        os << "; residual:";
        for (const auto& [label, coeff] : term.residual.terms())
            os << " " << coeff << "*" << label_name(label);
    }
    return os.str();
}

} // namespace

std::optional<double> schedule_phase(const PhaseSchedule& schedule, const std::string& mode) {
    for (const auto& [name, theta] : schedule)
        if (name == mode)
            return theta;
    return std::nullopt;
}

Scenario Scenario::cycle_bca() { return {Kind::CycleBca}; }
Scenario Scenario::cycle_cab() { return {Kind::CycleCab}; }

Scenario Scenario::pairwise(char s1, char s2, bool spectators) {
    Scenario s{Kind::Pairwise};
    s.sender1 = s1;
    s.sender2 = s2;
    s.measure_spectators = spectators;
    return s;
}

Scenario Scenario::merge_to_charlie() { return {Kind::MergeToCharlie}; }

Scenario Scenario::single_hop3(int target_node, std::string tag) {
    Scenario s{Kind::SingleHop3};
    s.hop_target = target_node;
    s.tag = std::move(tag);
    return s;
}

Scenario Scenario::one_directional2(std::string tag) {
    Scenario s{Kind::OneDirectional2};
    s.tag = std::move(tag);
    return s;
}

Scenario Scenario::from_name(const std::string& name) {
    if (name == "bca")
        return cycle_bca();
    if (name == "cab")
        return cycle_cab();
    if (name == "pairwise-ab" || name == "pairwise")
        return pairwise('a', 'b');
    if (name == "pairwise-bc")
        return pairwise('b', 'c');
    if (name == "pairwise-ca" || name == "pairwise-ac")
        return pairwise('c', 'a');
    if (name == "merge")
        return merge_to_charlie();
    if (name == "hop-a2")
        return single_hop3(2);
    if (name == "hop-a3")
        return single_hop3(3);
    if (name == "one-two")
        return one_directional2();
    throw Error(ErrorCode::InvalidArgument,
                "unknown scenario '" + name +
                    "' (expected bca, cab, pairwise-ab|bc|ca, merge, hop-a2, hop-a3, one-two)");
}

std::string Scenario::name() const {
    switch (kind) {
    case Kind::CycleBca: return "bca";
    case Kind::CycleCab: return "cab";
    case Kind::Pairwise: {
        std::string n = "pairwise-";
        n += sender1;
        n += sender2;
        return measure_spectators ? n + "+spectators" : n;
    }
    case Kind::MergeToCharlie: return "merge";
    case Kind::SingleHop3: return "hop-" + tag + std::to_string(hop_target);
    case Kind::OneDirectional2: return "one-two";
    }
    return "?";
}

ProtocolSpec scenario_plan(const Scenario& scenario, const ClusterGraph& graph) {
    ProtocolSpec spec;
    spec.name = scenario.name();
    switch (scenario.kind) {
    case Scenario::Kind::CycleBca: {
        require_nodes(scenario, graph, 12);
        spec.attachments = {{"a", 1}, {"b", 2}, {"c", 3}};
        spec.schedule = {{"a_in", 0.0},  {"a_1", kPi / 2}, {"b_in", 0.0},  {"b_1", kPi / 2},
                         {"c_in", 0.0},  {"c_1", kPi / 2}, {"4", 0.0},     {"5", kPi / 2},
                         {"6", kPi / 2}, {"7", kPi / 2},   {"11", 0.0},    {"12", 0.0}};
        spec.outputs = {8, 9, 10};
        break;
    }
    case Scenario::Kind::CycleCab: {
        require_nodes(scenario, graph, 12);
        spec.attachments = {{"a", 1}, {"b", 2}, {"c", 3}};
        spec.schedule = {{"a_in", kPi / 4}, {"a_1", 3 * kPi / 4}, {"b_in", kPi / 4},
                         {"b_1", 3 * kPi / 4}, {"c_in", kPi / 4}, {"c_1", 3 * kPi / 4},
                         {"5", kPi / 2},   {"6", kPi / 2},    {"7", kPi / 2},
                         {"8", kPi / 2},   {"9", kPi / 2},    {"10", kPi / 2}};
        spec.outputs = {11, 12, 4};
        break;
    }
    case Scenario::Kind::Pairwise: {
        require_nodes(scenario, graph, 12);
        const std::set<char> pair{scenario.sender1, scenario.sender2};
        int times = 0;
        if (pair == std::set<char>{'a', 'b'})
            times = 0;
        else if (pair == std::set<char>{'b', 'c'})
            times = 1;
        else if (pair == std::set<char>{'a', 'c'})
            times = 2;
        else
            throw Error(ErrorCode::InvalidArgument, "pairwise senders must be two of a, b, c");
        ProtocolSpec t = transport_pairwise(times, scenario.measure_spectators);
        spec.attachments = std::move(t.attachments);
        spec.schedule = std::move(t.schedule);
        spec.outputs = std::move(t.outputs);
        break;
    }
    case Scenario::Kind::MergeToCharlie: {
        require_nodes(scenario, graph, 12);
        spec.attachments = {{"a", 1}, {"b", 2}};
        spec.schedule = {{"a_in", kPi},    {"a_1", kPi / 2}, {"b_in", kPi / 4}, {"b_1", 3 * kPi / 4},
                         {"3", kPi / 2},   {"5", kPi / 2},   {"6", kPi / 2},    {"7", kPi / 2},
                         {"8", kPi / 2},   {"9", 0.0},       {"11", 0.0},       {"12", 0.0}};
        spec.outputs = {10, 4};
        break;
    }
    case Scenario::Kind::SingleHop3: {
        require_nodes(scenario, graph, 3);
        if (scenario.hop_target != 2 && scenario.hop_target != 3)
            throw Error(ErrorCode::InvalidArgument, "single-hop target must be node 2 or 3");
        const int other = scenario.hop_target == 3 ? 2 : 3;
        const double g = graph.weight(1, scenario.hop_target);
        spec.attachments = {{scenario.tag, 1}};
        spec.schedule = {{scenario.tag + "_in", std::atan(-g)},
                         {scenario.tag + "_1", std::atan(g)},
                         {std::to_string(other), 0.0}};
        spec.outputs = {scenario.hop_target};
        // The weighted hop teleports x_a/g^2 onto X and g^2*y_a onto Y; the
        // gains collapse to 1 at g=1.
        if (g != 0.0)
            spec.expected_gains = {{1.0 / (g * g), g * g}};
        break;
    }
    case Scenario::Kind::OneDirectional2: {
        require_nodes(scenario, graph, 2);
        spec.attachments = {{scenario.tag, 1}};
        spec.outputs = {2};
        spec.schedule = find_phase_schedule(graph, spec.attachments, spec.outputs);
        break;
    }
    }
    return spec;
}

PhaseSchedule phase_schedule(const Scenario& scenario, const ClusterGraph& graph) {
    return scenario_plan(scenario, graph).schedule;
}

const OutputQuadrature* TeleportationReport::find_output(const std::string& node,
                                                         char quadrature) const {
    for (const auto& out : outputs)
        if (out.node == node && out.quadrature == quadrature)
            return &out;
    return nullptr;
}

TeleportationReport run_custom(const ClusterGraph& graph, const ProtocolSpec& spec) {
    ModeSystem system = ModeSystem::cluster_expressions(graph);
    for (const auto& [tag, node] : spec.attachments)
        system.attach_input(tag, node);
    for (const auto& [name, theta] : spec.schedule)
        system.homodyne_equation(name, theta);

    SubstitutionMap sub;
    try {
        sub = solve_measurements(system);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularSystem)
            throw;
        throw Error(ErrorCode::ProtocolBroken, spec.name + ": " + e.what());
    }

    const int n = graph.node_count();
    const auto n_out = spec.outputs.size();
    if (!spec.expected_gains.empty() && spec.expected_gains.size() != n_out)
        throw Error(ErrorCode::InvalidArgument, "expected_gains must match the output count");

    TeleportationReport report;
    report.scenario = spec.name;
    report.resource_count = n;
    report.schedule = spec.schedule;
    report.attachments = spec.attachments;

    std::vector<OutputQuadrature> xs, ys;
    for (std::size_t i = 0; i < n_out; ++i) {
        const int node = spec.outputs[i];
        const auto [gain_x, gain_y] =
            spec.expected_gains.empty() ? std::pair{1.0, 1.0} : spec.expected_gains[i];
        const ModeSystem::Mode& mode = system.mode(std::to_string(node));
        if (mode.measured || mode.consumed)
            throw Error(ErrorCode::ProtocolBroken,
                        spec.name + ": output node " + mode.name + " was measured");

        std::string tag_x, tag_y;
        for (auto [quad, expr, expected] :
             {std::tuple{'X', &mode.x, gain_x}, std::tuple{'Y', &mode.y, gain_y}}) {
            TeleportationTerm term = classify_output(*expr, sub, n);
            const bool accepted = !term.input_tag.empty() && term.residual.empty() &&
                                  std::abs(term.input_gain - expected) < kGainTol;
            if (!accepted)
                throw Error(ErrorCode::ProtocolBroken,
                            spec.name + ": output " + std::string(1, quad) + mode.name +
                                " is not teleporting (expected gain " + std::to_string(expected) +
                                "): " + residual_description(term));
            OutputQuadrature out;
            out.node = mode.name;
            out.quadrature = quad;
            out.input_tag = term.input_tag;
            out.input_quadrature = term.input_kind == LabelKind::InputX ? 'x' : 'y';
            out.input_gain = term.input_gain;
            for (const auto& [k, coeff] : term.gains)
                out.gains.emplace_back("i_" + system.photocurrent_modes()[k], coeff);
            out.error_row = term.error_row;
            (quad == 'X' ? tag_x : tag_y) = term.input_tag;
            (quad == 'X' ? xs : ys).push_back(std::move(out));
        }
        if (tag_x != tag_y)
            throw Error(ErrorCode::ProtocolBroken,
                        spec.name + ": node " + mode.name + " receives quadratures of different senders (" +
                            tag_x + " vs " + tag_y + ")");
        report.routing.emplace_back(mode.name, tag_x);
    }

    report.outputs = std::move(xs);
    report.outputs.insert(report.outputs.end(), std::make_move_iterator(ys.begin()),
                          std::make_move_iterator(ys.end()));

    report.error_matrix.resize(static_cast<Eigen::Index>(report.outputs.size()), n);
    for (std::size_t r = 0; r < report.outputs.size(); ++r)
        report.error_matrix.row(static_cast<Eigen::Index>(r)) = report.outputs[r].error_row;
    report.variance_vector = error_variances(report.error_matrix, graph);
    for (std::size_t r = 0; r < report.outputs.size(); ++r)
        report.outputs[r].variance_coefficient = report.variance_vector(static_cast<Eigen::Index>(r));
    return report;
}

TeleportationReport run_protocol(const ClusterGraph& graph, const Scenario& scenario) {
    return run_custom(graph, scenario_plan(scenario, graph));
}

Eigen::VectorXd error_variances(const Eigen::MatrixXd& error_matrix, const ClusterGraph& graph) {
    if (error_matrix.cols() != graph.node_count())
        throw Error(ErrorCode::DimensionMismatch,
                    "error matrix has " + std::to_string(error_matrix.cols()) +
                        " columns for a " + std::to_string(graph.node_count()) + "-node graph");
    const GramKit kit = gram_kit(graph);
    return (error_matrix * kit.gram_inverse * error_matrix.transpose()).diagonal();
}

std::vector<double> default_phase_candidates(const ClusterGraph& graph) {
    std::vector<double> out = {0.0, kPi / 4, kPi / 2, 3 * kPi / 4};
    auto push_unique = [&out](double theta) {
        theta = std::fmod(theta, kPi);
        if (theta < 0)
            theta += kPi;
        for (double existing : out)
            if (std::abs(existing - theta) < 1e-12)
                return;
        out.push_back(theta);
    };
    const int n = graph.node_count();
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            if (graph.weight(i, j) != 0.0) {
                push_unique(std::atan(graph.weight(i, j)));
                push_unique(-std::atan(graph.weight(i, j)));
            }
    return out;
}

PhaseSchedule find_phase_schedule(const ClusterGraph& graph,
                                  const std::vector<std::pair<std::string, int>>& attachments,
                                  const std::vector<int>& output_nodes,
                                  const std::vector<double>& candidate_phases) {
    const std::vector<double> candidates =
        candidate_phases.empty() ? default_phase_candidates(graph) : candidate_phases;
    if (candidates.empty())
        throw Error(ErrorCode::InvalidArgument, "candidate phase set is empty");

    // Measured set: both outputs of every beam splitter, then the cluster
    // nodes that are neither attached nor outputs, ascending.
    std::vector<std::string> measured;
    std::set<int> skip(output_nodes.begin(), output_nodes.end());
    for (const auto& [tag, node] : attachments) {
        measured.push_back(tag + "_in");
        measured.push_back(tag + "_1");
        skip.insert(node);
    }
    for (int node = 1; node <= graph.node_count(); ++node)
        if (!skip.count(node))
            measured.push_back(std::to_string(node));

    double search_space = 1.0;
    for (std::size_t i = 0; i < measured.size(); ++i)
        search_space *= static_cast<double>(candidates.size());
    if (search_space > 2e6)
        throw Error(ErrorCode::InvalidArgument,
                    "phase search space too large (" + std::to_string(measured.size()) +
                        " modes x " + std::to_string(candidates.size()) + " candidates)");

    ProtocolSpec trial;
    trial.name = "search";
    trial.attachments = attachments;
    trial.outputs = output_nodes;

    std::optional<PhaseSchedule> best;
    double best_total = 0.0;
    std::vector<std::size_t> odo(measured.size(), 0);
    bool done = false;
    while (!done) {
        trial.schedule.clear();
        for (std::size_t i = 0; i < measured.size(); ++i)
            trial.schedule.emplace_back(measured[i], candidates[odo[i]]);
        try {
            const TeleportationReport report = run_custom(graph, trial);
            const double total = report.variance_vector.sum();
            if (!best || total < best_total - 1e-12) {
                best = trial.schedule;
                best_total = total;
            }
        } catch (const Error&) {
            // schedule does not teleport; keep searching
        }
        // odometer, last mode fastest: candidate tuples in lexicographic order
        done = true;
        for (std::size_t i = measured.size(); i-- > 0;) {
            if (++odo[i] < candidates.size()) {
                done = false;
                break;
            }
            odo[i] = 0;
        }
    }
    if (!best)
        throw Error(ErrorCode::NotFound, "no candidate phase schedule teleports the requested outputs");
    return *best;
}

TeleportationReport composite_report(const std::vector<TeleportationReport>& reports) {
    if (reports.empty())
        throw Error(ErrorCode::InvalidArgument, "composite of zero reports");
    if (reports.size() == 1)
        return reports.front();

    std::set<std::string> tags;
    for (const auto& r : reports)
        for (const auto& [node, tag] : r.routing)
            if (!tags.insert(tag).second)
                throw Error(ErrorCode::LabelCollision, "input tag used by several clusters: " + tag);

    TeleportationReport out;
    std::string name = "composite[";
    int total_nodes = 0;
    Eigen::Index total_rows = 0;
    for (const auto& r : reports) {
        total_nodes += r.resource_count;
        total_rows += static_cast<Eigen::Index>(r.outputs.size());
    }
    out.resource_count = total_nodes;
    out.error_matrix = Eigen::MatrixXd::Zero(total_rows, total_nodes);
    out.variance_vector.resize(total_rows);

    auto emit = [&out, &reports](char quadrature, auto&& fn) {
        int offset = 0;
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const std::string prefix = std::to_string(k + 1) + ":";
            for (const auto& q : reports[k].outputs)
                if (q.quadrature == quadrature)
                    fn(q, prefix, offset, reports[k].resource_count);
            offset += reports[k].resource_count;
        }
    };
    Eigen::Index row = 0;
    for (char quadrature : {'X', 'Y'}) {
        emit(quadrature, [&](const OutputQuadrature& q, const std::string& prefix, int offset, int nk) {
            OutputQuadrature copy = q;
            copy.node = prefix + q.node;
            copy.gains.clear();
            for (const auto& [gname, coeff] : q.gains)
                copy.gains.emplace_back(prefix + gname, coeff);
            copy.error_row = Eigen::VectorXd::Zero(out.resource_count);
            copy.error_row.segment(offset, nk) = q.error_row;
            out.error_matrix.row(row) = copy.error_row;
            out.variance_vector(row) = q.variance_coefficient;
            ++row;
            out.outputs.push_back(std::move(copy));
        });
    }
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const std::string prefix = std::to_string(k + 1) + ":";
        name += (k ? "+" : "") + reports[k].scenario;
        for (const auto& [node, tag] : reports[k].routing)
            out.routing.emplace_back(prefix + node, tag);
        for (const auto& [mode, theta] : reports[k].schedule)
            out.schedule.emplace_back(prefix + mode, theta);
        for (const auto& [tag, node] : reports[k].attachments)
            out.attachments.emplace_back(tag, node);
    }
    out.scenario = name + "]";
    return out;
}

std::string report_to_json(const TeleportationReport& report, int indent) {
    nlohmann::ordered_json j;
    j["scenario"] = report.scenario;
    j["resource_count"] = report.resource_count;
    nlohmann::ordered_json attach = nlohmann::ordered_json::array();
    for (const auto& [tag, node] : report.attachments)
        attach.push_back({{"tag", tag}, {"node", node}});
    j["attachments"] = attach;
    nlohmann::ordered_json routing = nlohmann::ordered_json::object();
    for (const auto& [node, tag] : report.routing)
        routing[node] = tag;
    j["routing"] = routing;
    nlohmann::ordered_json schedule = nlohmann::ordered_json::array();
    for (const auto& [mode, theta] : report.schedule)
        schedule.push_back({{"mode", mode}, {"theta", theta}});
    j["schedule"] = schedule;
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (const auto& q : report.outputs) {
        nlohmann::ordered_json o;
        o["node"] = q.node;
        o["quadrature"] = std::string(1, q.quadrature);
        o["input"] = {{"tag", q.input_tag},
                      {"quadrature", std::string(1, q.input_quadrature)},
                      {"gain", q.input_gain}};
        nlohmann::ordered_json ff = nlohmann::ordered_json::object();
        for (const auto& [gname, coeff] : q.gains)
            ff[gname] = coeff;
        o["feedforward"] = ff;
        o["error_row"] = std::vector<double>(q.error_row.data(), q.error_row.data() + q.error_row.size());
        o["variance_coefficient"] = q.variance_coefficient;
        outputs.push_back(std::move(o));
    }
    j["outputs"] = outputs;
    nlohmann::ordered_json ematrix = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < report.error_matrix.rows(); ++r)
        ematrix.push_back(std::vector<double>(report.error_matrix.row(r).begin(),
                                              report.error_matrix.row(r).end()));
    j["error_matrix"] = ematrix;
    j["variance_vector"] = std::vector<double>(report.variance_vector.data(),
                                               report.variance_vector.data() +
                                                   report.variance_vector.size());
    return j.dump(indent);
}

} // namespace ctq

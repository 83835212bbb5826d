#include "ctq/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "json.hpp"

#include "ctq/analysis.hpp"
#include "ctq/covsim.hpp"
#include "ctq/graph.hpp"
#include "ctq/protocol.hpp"

namespace ctq {

namespace {

std::string vec_str(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v(i);
    os << ")";
    return os.str();
}

bool vec_close(const Eigen::VectorXd& got, const std::vector<double>& want, double tol) {
    if (got.size() != static_cast<Eigen::Index>(want.size()))
        return false;
    for (Eigen::Index i = 0; i < got.size(); ++i)
        if (std::abs(got(i) - want[i]) > tol)
            return false;
    return true;
}

Eigen::MatrixXd bca_error_matrix() {
    Eigen::MatrixXd e(6, 12);
    e << -1, 0, -1, -1, -3, 0, 0, 0, 1, 1, 0, 0,
         -1, -1, 0, 0, 0, -3, 0, 1, 0, 1, -1, 0,
          0, -1, -1, 0, 0, 0, -3, 1, 1, 0, 0, -1,
          0, -1, 0, 0, 0, 1, 1, 2, 0, 0, 0, 0,
          0, 0, -1, 0, 1, 0, 1, 0, 2, 0, 0, 0,
         -1, 0, 0, 0, 1, 1, 0, 0, 0, 2, 0, 0;
    return e;
}

double bisect_flip(double lo, double hi, const std::pair<double, double>& ref) {
    bool side = three_node_dominates(lo, ref);
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (three_node_dominates(mid, ref) == side)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

int VerificationReport::failures() const {
    int n = 0;
    for (const auto& c : checks)
        n += c.pass ? 0 : 1;
    return n;
}

VerificationReport run_verification(std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    VerificationReport report;
    auto add = [&report](std::string id, std::string name, bool pass, std::string detail) {
        report.checks.push_back({std::move(id), std::move(name), pass, std::move(detail)});
    };

    const ClusterGraph twelve = ClusterGraph::twelve();
    const ClusterGraph three1 = ClusterGraph::three(1, 1, 0);
    const ClusterGraph two = ClusterGraph::two();

    // Reports used by several criteria.
    std::map<std::string, TeleportationReport> reports;
    const auto t_runs0 = clock::now();
    reports.emplace("bca", run_protocol(twelve, Scenario::cycle_bca()));
    reports.emplace("cab", run_protocol(twelve, Scenario::cycle_cab()));
    reports.emplace("pairwise-ab", run_protocol(twelve, Scenario::pairwise('a', 'b')));
    reports.emplace("merge", run_protocol(twelve, Scenario::merge_to_charlie()));
    const double run_seconds = std::chrono::duration<double>(clock::now() - t_runs0).count();

    // 1. Variance-vector reproduction against the published vectors.
    {
        const std::map<std::string, std::vector<double>> want = {
            {"bca", {5, 5, 5, 3, 3, 3}},
            {"cab", {3, 3, 3, 5, 5, 5}},
            {"pairwise-ab", {3, 5, 5, 3}},
            {"merge", {3, 5, 5, 3}},
        };
        bool pass = run_seconds < 1.0;
        std::ostringstream detail;
        for (const auto& [name, expected] : want) {
            const bool ok = vec_close(reports.at(name).variance_vector, expected, 1e-9);
            pass = pass && ok;
            if (!ok)
                detail << name << ": got " << vec_str(reports.at(name).variance_vector)
                       << ", reference says (" << expected[0];
            if (!ok) {
                for (std::size_t i = 1; i < expected.size(); ++i)
                    detail << "," << expected[i];
                detail << "); ";
            }
        }
        if (!detail.str().empty())
            detail << "computed vectors swap the X/Y blocks of the reference for the two cycles; "
                      "the reference's own pairwise vector assigns 3 to the identical X8 error row "
                      "(see criterion 3, which passes entrywise)";
        else
            detail << "all four scenarios reproduced";
        detail << "; protocol runs took " << run_seconds << " s";
        add("1", "variance vectors (bca, cab, pairwise, merge)", pass, detail.str());
    }

    // 2. Routing reproduction.
    {
        const std::vector<std::pair<std::string, std::string>> bca_want = {{"8", "b"}, {"9", "c"}, {"10", "a"}};
        const std::vector<std::pair<std::string, std::string>> cab_want = {{"11", "c"}, {"12", "a"}, {"4", "b"}};
        const bool pass = reports.at("bca").routing == bca_want && reports.at("cab").routing == cab_want;
        std::ostringstream detail;
        detail << "bca:";
        for (const auto& [n, t] : reports.at("bca").routing)
            detail << " " << n << "<-" << t;
        detail << "; cab:";
        for (const auto& [n, t] : reports.at("cab").routing)
            detail << " " << n << "<-" << t;
        add("2", "routing (bca, cab)", pass, detail.str());
    }

    // 3. E-matrix and feedforward-gain reproduction for the BCA cycle.
    {
        const Eigen::MatrixXd want = bca_error_matrix();
        const double e_err = (reports.at("bca").error_matrix - want).cwiseAbs().maxCoeff();
        const std::map<std::string, double> y8_want = {
            {"i_4", 1.0}, {"i_6", -1.0}, {"i_7", -1.0}, {"i_b_1", -std::sqrt(2.0)}};
        const OutputQuadrature* y8 = reports.at("bca").find_output("8", 'Y');
        bool gains_ok = y8 != nullptr && y8->gains.size() == y8_want.size();
        if (gains_ok)
            for (const auto& [gname, coeff] : y8->gains) {
                auto it = y8_want.find(gname);
                gains_ok = gains_ok && it != y8_want.end() && std::abs(coeff - it->second) < 1e-9;
            }
        std::ostringstream detail;
        detail << "max |E - reference| = " << e_err << "; Y8 gains "
               << (gains_ok ? "= i_4 - i_6 - i_7 - sqrt(2) i_b_1" : "mismatch");
        add("3", "E matrix entrywise + Y8 gains (bca)", e_err < 1e-9 && gains_ok, detail.str());
    }

    // 4. Three-node law and dominance boundaries.
    {
        bool pass = true;
        std::ostringstream detail;
        for (double g : {0.5, 1.0 / std::sqrt(3.0), 1.0, std::sqrt(2.0), 2.0}) {
            const auto rep = run_protocol(ClusterGraph::three(g, g, 0), Scenario::single_hop3(3));
            const bool ok =
                vec_close(rep.variance_vector, {2.0 + 1.0 / (g * g), 1.0 + g * g}, 1e-9);
            pass = pass && ok;
            if (!ok)
                detail << "g=" << g << ": got " << vec_str(rep.variance_vector) << "; ";
        }
        const auto [lo_want, hi_want] = dominance_interval();
        const double lo = bisect_flip(0.3, 1.0, {5.0, 3.0});
        const double hi = bisect_flip(1.0, 2.5, {5.0, 3.0});
        const bool flips_ok = std::abs(lo - lo_want) < 1e-6 && std::abs(hi - hi_want) < 1e-6;
        pass = pass && flips_ok;
        detail << "variance law (2+1/g^2, 1+g^2) over the g set; dominance vs (5,3) flips at "
               << lo << " and " << hi << " (want 1/sqrt(3)=" << lo_want << ", sqrt(2)=" << hi_want
               << ")";
        add("4", "three-node law + dominance boundaries", pass, detail.str());
    }

    // 5. Two-node law and composite.
    {
        const PhaseSchedule found = find_phase_schedule(two, {{"a", 1}}, {2});
        ProtocolSpec spec;
        spec.name = "one-two";
        spec.attachments = {{"a", 1}};
        spec.outputs = {2};
        spec.schedule = found;
        const auto rep = run_custom(two, spec);
        const bool law_ok = vec_close(rep.variance_vector, {2.0, 2.0}, 1e-9);

        std::vector<TeleportationReport> singles;
        for (const char* tag : {"a", "b", "c"})
            singles.push_back(run_protocol(two, Scenario::one_directional2(tag)));
        const auto composite = composite_report(singles);
        const bool comp_ok = vec_close(composite.variance_vector, {2, 2, 2, 2, 2, 2}, 1e-9);
        std::ostringstream detail;
        detail << "found schedule variance " << vec_str(rep.variance_vector)
               << "; three-transfer composite " << vec_str(composite.variance_vector);
        add("5", "two-node law + six-cluster composite", law_ok && comp_ok, detail.str());
    }

    // 6. Cross-engine oracle.
    {
        bool pass = true;
        double worst = 0.0;
        std::ostringstream detail;
        const std::vector<std::pair<const ClusterGraph*, Scenario>> cases = {
            {&twelve, Scenario::cycle_bca()},
            {&twelve, Scenario::cycle_cab()},
            {&twelve, Scenario::pairwise('a', 'b')},
            {&twelve, Scenario::merge_to_charlie()},
            {&three1, Scenario::single_hop3(3)},
            {&three1, Scenario::single_hop3(2)},
            {&two, Scenario::one_directional2()},
        };
        for (const auto& [graph, scenario] : cases) {
            const TeleportationReport rep = run_protocol(*graph, scenario);
            for (double s : {4.0, 8.0, 12.0}) {
                const double v = variance_from_db(s);
                ScenarioSimulation first =
                    simulate_scenario(*graph, scenario, s, {}, seed, &rep);
                for (Eigen::Index i = 0; i < first.channel_variance.size(); ++i) {
                    const double expect = 0.25 + rep.variance_vector(i) * v;
                    const double delta = std::abs(first.channel_variance(i) - expect);
                    worst = std::max(worst, delta);
                    if (delta > 1e-6) {
                        pass = false;
                        detail << scenario.name() << " s=" << s << " "
                               << first.quadrature_names[i] << ": delta " << delta << "; ";
                    }
                }
                for (int k = 1; k < 100; ++k) {
                    const ScenarioSimulation other =
                        simulate_scenario(*graph, scenario, s, {}, seed + k, &rep);
                    const bool identical =
                        std::memcmp(first.channel_variance.data(), other.channel_variance.data(),
                                    sizeof(double) * first.channel_variance.size()) == 0 &&
                        std::memcmp(first.conditional_variance.data(),
                                    other.conditional_variance.data(),
                                    sizeof(double) * first.conditional_variance.size()) == 0;
                    if (!identical) {
                        pass = false;
                        detail << scenario.name() << " s=" << s
                               << ": variance depends on sampled outcomes; ";
                        break;
                    }
                }
            }
        }
        detail << "max |simulated - (1/4 + c*10^(-s/10)/4)| = " << worst
               << " over 7 scenarios x {4,8,12} dB, 100 outcome sets each";
        add("6", "cross-engine oracle (covariance simulation)", pass, detail.str());
    }

    // 7. Nullifier certification.
    {
        bool pass = true;
        double worst = 0.0;
        for (const ClusterGraph* graph : {&twelve, &three1, &two}) {
            const double s = 10.0;
            const Eigen::VectorXd got = nullifier_variances(*graph, s);
            const GramKit kit = gram_kit(*graph);
            for (int i = 0; i < graph->node_count(); ++i) {
                const double expect = kit.gram(i, i) * variance_from_db(s);
                worst = std::max(worst, std::abs(got(i) - expect));
            }
        }
        pass = worst < 1e-9;
        add("7", "nullifier certification (12, 3, 2 nodes)", pass,
            "max |var(Y_i - sum A_ij X_j) - (I+A^2)_ii v| = " + std::to_string(worst));
    }

    // 8. Error-probability ordering and the 8 dB gap.
    {
        bool order_ok = true;
        for (double s = 2.0; s <= 14.0 + 1e-9; s += 0.25) {
            const SqueezingLevel level = SqueezingLevel::from_db(s);
            const double p12 = protocol_error_probability(kProfileTwelve, level);
            const double p3 = protocol_error_probability(three_node_profile(1.0), level);
            const double p2 = protocol_error_probability(kProfileTwo, level);
            order_ok = order_ok && p2 < p3 && p3 < p12;
        }
        const SqueezingLevel at8 = SqueezingLevel::from_db(8.0);
        const double p12 = protocol_error_probability(kProfileTwelve, at8);
        const double p2 = protocol_error_probability(kProfileTwo, at8);
        const double relative = (p12 - p2) / p12;
        const double absolute = p12 - p2;
        const bool gap_ok = std::abs(relative - 0.20) <= 0.05;
        std::ostringstream detail;
        detail << "ordering p_two < p_three(1) < p_twelve holds on [2,14] dB: "
               << (order_ok ? "yes" : "NO") << "; at 8 dB relative reduction = " << relative
               << " (required 0.20 +- 0.05), absolute gap = " << absolute
               << " (the published 20% matches the absolute gap, not the relative one)";
        add("8", "error-probability ordering + 8 dB gap", order_ok && gap_ok, detail.str());
    }

    // 9. Weight optimizer.
    {
        const WeightOptimum opt = optimize_weight(8.0);
        const SqueezingLevel level = SqueezingLevel::from_db(8.0);
        auto objective = [&level](double g) {
            return protocol_error_probability(three_node_profile(g), level);
        };
        const bool pass = std::abs(opt.g - 1.0) <= 0.05 &&
                          opt.p <= objective(opt.g + 0.1) && opt.p <= objective(opt.g - 0.1);
        std::ostringstream detail;
        detail << "g* = " << opt.g << ", P(g*) = " << opt.p;
        add("9", "optimize_weight(8 dB) near g=1", pass, detail.str());
    }

    // 10. Symplectic and Gaussian invariants.
    {
        const int n = 12;
        Eigen::MatrixXd composed = SymplecticOp::bogoliubov(twelve).matrix();
        composed = SymplecticOp::beam_splitter(n, 0, 4).matrix() * composed;
        composed = SymplecticOp::beam_splitter(n, 3, 7).matrix() * composed;
        Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        omega.topRightCorner(n, n) = 0.5 * Eigen::MatrixXd::Identity(n, n);
        omega.bottomLeftCorner(n, n) = -0.5 * Eigen::MatrixXd::Identity(n, n);
        const double defect =
            (composed * omega * composed.transpose() - omega).cwiseAbs().maxCoeff();

        GaussianState st = GaussianState::squeezed_vacuum({6.0, 6.0});
        st = apply_symplectic(st, SymplecticOp::beam_splitter(2, 0, 1));
        NormalSampler rng(seed);
        bool outcome_independent = true;
        Eigen::MatrixXd cov_ref;
        for (double forced : {-1.0, 0.0, 3.0}) {
            auto [conditioned, rec] = measure_homodyne(st, 0, 0.7, forced, rng);
            if (cov_ref.size() == 0)
                cov_ref = conditioned.cov;
            else
                outcome_independent =
                    outcome_independent &&
                    std::memcmp(cov_ref.data(), conditioned.cov.data(),
                                sizeof(double) * cov_ref.size()) == 0;
        }

        Eigen::VectorXd shift(st.mean.size());
        shift << 0.3, -1.2, 0.0, 4.5;
        const GaussianState displaced = displace(st, shift);
        const bool displacement_ok =
            std::memcmp(st.cov.data(), displaced.cov.data(), sizeof(double) * st.cov.size()) == 0;

        const bool pass = defect < 1e-9 && outcome_independent && displacement_ok;
        std::ostringstream detail;
        detail << "composed S Omega S^T defect = " << defect
               << "; conditional covariance outcome-independent: "
               << (outcome_independent ? "bitwise" : "NO")
               << "; displacement leaves covariance untouched: " << (displacement_ok ? "yes" : "NO");
        add("10", "symplectic + Gaussian invariants", pass, detail.str());
    }

    report.elapsed_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    // 11. Runtime budget for the whole suite.
    add("11", "verification runtime under 5 s", report.elapsed_seconds < 5.0,
        "elapsed " + std::to_string(report.elapsed_seconds) + " s");

    return report;
}

std::string verification_table(const VerificationReport& report) {
    std::ostringstream os;
    for (const auto& c : report.checks) {
        os << (c.pass ? "PASS" : "FAIL") << "  criterion " << c.id;
        if (c.id.size() < 2)
            os << " ";
        os << "  " << c.name;
        if (!c.detail.empty())
            os << "\n      " << c.detail;
        os << "\n";
    }
    os << (report.failures() == 0 ? "all criteria passed"
                                  : std::to_string(report.failures()) + " criterion(s) failed")
       << " in " << report.elapsed_seconds << " s\n";
    return os.str();
}

std::string verification_to_json(const VerificationReport& report, int indent) {
    nlohmann::ordered_json j;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks)
        j["checks"].push_back(
            {{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["failures"] = report.failures();
    j["elapsed_seconds"] = report.elapsed_seconds;
    return j.dump(indent);
}

} // namespace ctq

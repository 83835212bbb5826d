#include "ctq/ctq.h"

#include <cstdio>
#include <cstring>
#include <new>
#include <string>

#include "json.hpp"

#include "ctq/analysis.hpp"
#include "ctq/covsim.hpp"
#include "ctq/errors.hpp"
#include "ctq/graph.hpp"
#include "ctq/protocol.hpp"
#include "ctq/verify.hpp"

struct ctq_graph {
    ctq::ClusterGraph graph;
};

struct ctq_report {
    ctq::TeleportationReport report;
};

namespace {

thread_local std::string g_last_error;

ctq_status status_of(ctq::ErrorCode code) {
    using ctq::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidArgument: return CTQ_ERR_INVALID_ARGUMENT;
    case ErrorCode::NotSymmetric: return CTQ_ERR_NOT_SYMMETRIC;
    case ErrorCode::NonzeroDiagonal: return CTQ_ERR_NONZERO_DIAGONAL;
    case ErrorCode::NotPositiveDefinite: return CTQ_ERR_NOT_POSITIVE_DEFINITE;
    case ErrorCode::EigendecompositionFailure: return CTQ_ERR_EIGENDECOMPOSITION;
    case ErrorCode::NodeAlreadyMeasured: return CTQ_ERR_NODE_ALREADY_MEASURED;
    case ErrorCode::DuplicateInputTag: return CTQ_ERR_DUPLICATE_INPUT_TAG;
    case ErrorCode::ModeAlreadyMeasured: return CTQ_ERR_MODE_ALREADY_MEASURED;
    case ErrorCode::SingularSystem: return CTQ_ERR_SINGULAR_SYSTEM;
    case ErrorCode::IncompatibleGraph: return CTQ_ERR_INCOMPATIBLE_GRAPH;
    case ErrorCode::ProtocolBroken: return CTQ_ERR_PROTOCOL_BROKEN;
    case ErrorCode::DimensionMismatch: return CTQ_ERR_DIMENSION_MISMATCH;
    case ErrorCode::NotSymplectic: return CTQ_ERR_NOT_SYMPLECTIC;
    case ErrorCode::DegenerateMarginal: return CTQ_ERR_DEGENERATE_MARGINAL;
    case ErrorCode::NotFound: return CTQ_ERR_NOT_FOUND;
    case ErrorCode::LabelCollision: return CTQ_ERR_LABEL_COLLISION;
    case ErrorCode::Io: return CTQ_ERR_IO;
    }
    return CTQ_ERR_INTERNAL;
}

template <typename Fn>
ctq_status guarded(Fn&& fn) {
    try {
        fn();
        return CTQ_OK;
    } catch (const ctq::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CTQ_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CTQ_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CTQ_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(::operator new(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ctq::ClusterGraph graph_from_spec(const std::string& spec) {
    if (spec == "twelve")
        return ctq::ClusterGraph::twelve();
    if (spec == "two")
        return ctq::ClusterGraph::two();
    if (spec.rfind("three:", 0) == 0) {
        double g12 = 0, g13 = 0, g23 = 0;
        if (std::sscanf(spec.c_str() + 6, "%lf,%lf,%lf", &g12, &g13, &g23) != 3)
            throw ctq::Error(ctq::ErrorCode::InvalidArgument,
                             "three-node spec must be three:g12,g13,g23");
        return ctq::ClusterGraph::three(g12, g13, g23);
    }
    if (spec.rfind("file:", 0) == 0)
        return ctq::ClusterGraph::load(spec.substr(5));
    throw ctq::Error(ctq::ErrorCode::InvalidArgument,
                     "graph spec must be twelve | three:g12,g13,g23 | two | file:<path>");
}

nlohmann::ordered_json oracle_json(const ctq::ClusterGraph& graph, const ctq::Scenario& scenario,
                                   double s_db, uint64_t seed,
                                   const ctq::TeleportationReport& report) {
    const ctq::ScenarioSimulation sim =
        ctq::simulate_scenario(graph, scenario, s_db, {}, seed, &report);
    nlohmann::ordered_json o;
    o["s_db"] = s_db;
    o["seed"] = seed;
    o["quadratures"] = sim.quadrature_names;
    const double v = ctq::variance_from_db(s_db);
    std::vector<double> expected, deltas;
    for (Eigen::Index i = 0; i < sim.channel_variance.size(); ++i) {
        expected.push_back(0.25 + report.variance_vector(i) * v);
        deltas.push_back(sim.channel_variance(i) - expected.back());
    }
    o["channel_variance"] = std::vector<double>(sim.channel_variance.begin(),
                                                sim.channel_variance.end());
    o["predicted_variance"] = expected;
    o["delta"] = deltas;
    o["conditional_variance"] = std::vector<double>(sim.conditional_variance.begin(),
                                                    sim.conditional_variance.end());
    o["sampled_outcomes"] = sim.outcomes;
    o["corrected_mean"] = std::vector<double>(sim.corrected_mean.begin(),
                                              sim.corrected_mean.end());
    return o;
}

} // namespace

extern "C" {

const char* ctq_version(void) { return "1.0.0"; }

const char* ctq_last_error(void) { return g_last_error.c_str(); }

void ctq_string_free(char* s) { ::operator delete(s); }

ctq_status ctq_graph_twelve(ctq_graph** out) {
    return guarded([&] { *out = new ctq_graph{ctq::ClusterGraph::twelve()}; });
}

ctq_status ctq_graph_three(double g12, double g13, double g23, ctq_graph** out) {
    return guarded([&] { *out = new ctq_graph{ctq::ClusterGraph::three(g12, g13, g23)}; });
}

ctq_status ctq_graph_two(ctq_graph** out) {
    return guarded([&] { *out = new ctq_graph{ctq::ClusterGraph::two()}; });
}

ctq_status ctq_graph_from_data(int n, const double* weights, ctq_graph** out) {
    return guarded([&] {
        if (n < 1 || weights == nullptr)
            throw ctq::Error(ctq::ErrorCode::InvalidArgument, "need n >= 1 and a weight matrix");
        Eigen::MatrixXd w(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                w(i, j) = weights[i * n + j];
        *out = new ctq_graph{ctq::ClusterGraph::validated(std::move(w))};
    });
}

ctq_status ctq_graph_from_file(const char* path, ctq_graph** out) {
    return guarded([&] { *out = new ctq_graph{ctq::ClusterGraph::load(path)}; });
}

ctq_status ctq_graph_write_file(const ctq_graph* graph, const char* path) {
    return guarded([&] { graph->graph.save(path); });
}

ctq_status ctq_graph_from_spec(const char* spec, ctq_graph** out) {
    return guarded([&] { *out = new ctq_graph{graph_from_spec(spec)}; });
}

int ctq_graph_node_count(const ctq_graph* graph) {
    return graph ? graph->graph.node_count() : 0;
}

double ctq_graph_weight(const ctq_graph* graph, int i, int j) {
    if (!graph || i < 1 || j < 1 || i > graph->graph.node_count() || j > graph->graph.node_count())
        return 0.0;
    return graph->graph.weight(i, j);
}

ctq_status ctq_graph_describe(const ctq_graph* graph, char** out_json) {
    return guarded([&] {
        const ctq::GramKit kit = ctq::gram_kit(graph->graph);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kit.gram);
        nlohmann::ordered_json j;
        j["nodes"] = graph->graph.node_count();
        auto matrix_rows = [](const Eigen::MatrixXd& m) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
            return rows;
        };
        j["weights"] = matrix_rows(graph->graph.weights());
        j["gram"] = matrix_rows(kit.gram);
        j["gram_inverse"] = matrix_rows(kit.gram_inverse);
        j["gram_eigenvalues"] = std::vector<double>(es.eigenvalues().begin(),
                                                    es.eigenvalues().end());
        *out_json = dup_string(j.dump(2));
    });
}

void ctq_graph_free(ctq_graph* graph) { delete graph; }

ctq_status ctq_run_protocol(const ctq_graph* graph, const char* scenario, ctq_report** out) {
    return guarded([&] {
        *out = new ctq_report{
            ctq::run_protocol(graph->graph, ctq::Scenario::from_name(scenario))};
    });
}

int ctq_report_output_count(const ctq_report* report) {
    return report ? static_cast<int>(report->report.outputs.size()) : 0;
}

ctq_status ctq_report_variances(const ctq_report* report, double* out, int capacity) {
    return guarded([&] {
        const auto& v = report->report.variance_vector;
        if (capacity < v.size())
            throw ctq::Error(ctq::ErrorCode::InvalidArgument, "output buffer too small");
        for (Eigen::Index i = 0; i < v.size(); ++i)
            out[i] = v(i);
    });
}

ctq_status ctq_report_json(const ctq_report* report, char** out_json) {
    return guarded([&] { *out_json = dup_string(ctq::report_to_json(report->report)); });
}

void ctq_report_free(ctq_report* report) { delete report; }

ctq_status ctq_run_json(const ctq_graph* graph, const char* scenario, double s_db, uint64_t seed,
                        int with_oracle, char** out_json) {
    return guarded([&] {
        const ctq::Scenario sc = ctq::Scenario::from_name(scenario);
        const ctq::TeleportationReport report = ctq::run_protocol(graph->graph, sc);
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(ctq::report_to_json(report));
        if (with_oracle)
            j["oracle"] = oracle_json(graph->graph, sc, s_db, seed, report);
        *out_json = dup_string(j.dump(2));
    });
}

ctq_status ctq_error_probability(const double* xy_pairs, int npairs, double s_db, double* out_p) {
    return guarded([&] {
        if (!xy_pairs || npairs < 1)
            throw ctq::Error(ctq::ErrorCode::InvalidArgument, "need at least one (x,y) pair");
        ctq::ErrorProfile profile;
        for (int i = 0; i < npairs; ++i)
            profile.emplace_back(xy_pairs[2 * i], xy_pairs[2 * i + 1]);
        *out_p = ctq::protocol_error_probability(profile, ctq::SqueezingLevel::from_db(s_db));
    });
}

ctq_status ctq_optimize_weight(double s_db, double* out_g, double* out_p) {
    return guarded([&] {
        const ctq::WeightOptimum opt = ctq::optimize_weight(s_db);
        if (out_g)
            *out_g = opt.g;
        if (out_p)
            *out_p = opt.p;
    });
}

ctq_status ctq_dominance_interval(double* out_low, double* out_high) {
    return guarded([&] {
        const auto [lo, hi] = ctq::dominance_interval();
        if (out_low)
            *out_low = lo;
        if (out_high)
            *out_high = hi;
    });
}

ctq_status ctq_sweep_csv(double s_min, double s_max, double step, const char* path) {
    return guarded([&] { ctq::write_sweep_csv(ctq::sweep_comparison(s_min, s_max, step), path); });
}

ctq_status ctq_verify(uint64_t seed, char** out_table, char** out_json, int* out_failures) {
    return guarded([&] {
        const ctq::VerificationReport report = ctq::run_verification(seed);
        if (out_table)
            *out_table = dup_string(ctq::verification_table(report));
        if (out_json)
            *out_json = dup_string(ctq::verification_to_json(report));
        if (out_failures)
            *out_failures = report.failures();
    });
}

} // extern "C"

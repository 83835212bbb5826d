// Command-line front end. Talks to the engine exclusively through the C API.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "ctq/ctq.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

int fail(ctq_status status) {
    std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(status), ctq_last_error());
    return kExitUsage;
}

struct GraphHandle {
    ctq_graph* g = nullptr;
    ~GraphHandle() { ctq_graph_free(g); }
};

struct StringHandle {
    char* s = nullptr;
    ~StringHandle() { ctq_string_free(s); }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous-variable cluster-state teleportation toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "seed for sampled measurement outcomes")->capture_default_str();

    std::string scenario = "bca", graph_spec = "twelve", out_path = "sweep.csv";
    double s_db = 10.0, s_min = 2.0, s_max = 14.0, step = 0.25;
    bool with_oracle = false, as_json = false;

    CLI::App* run = app.add_subcommand("run", "run one teleportation scenario, print the report as JSON");
    run->add_option("--scenario", scenario,
                    "bca | cab | pairwise-ab|bc|ca | merge | hop-a2 | hop-a3 | one-two")
        ->capture_default_str();
    run->add_option("--graph", graph_spec, "twelve | three:g12,g13,g23 | two | file:<path>")
        ->capture_default_str();
    run->add_option("--s", s_db, "squeezing degree in dB for the oracle")->capture_default_str();
    run->add_flag("--oracle", with_oracle, "append the covariance-simulation cross-check");

    CLI::App* verify = app.add_subcommand("verify", "run the full verification suite");
    verify->add_flag("--json", as_json, "emit the table as JSON");

    CLI::App* sweep = app.add_subcommand("sweep", "write the error-probability comparison CSV");
    sweep->add_option("--s-min", s_min, "first squeezing degree, dB")->capture_default_str();
    sweep->add_option("--s-max", s_max, "last squeezing degree, dB")->capture_default_str();
    sweep->add_option("--step", step, "squeezing step, dB")->capture_default_str();
    sweep->add_option("--out", out_path, "output CSV path")->capture_default_str();

    CLI::App* optimize = app.add_subcommand("optimize-g", "optimal three-node weight coefficient");
    optimize->add_option("--s", s_db, "squeezing degree in dB")->capture_default_str();

    CLI::App* describe = app.add_subcommand("describe", "print a graph and its derived matrices");
    describe->add_option("--graph", graph_spec, "twelve | three:g12,g13,g23 | two | file:<path>")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (run->parsed()) {
        GraphHandle graph;
        if (ctq_status st = ctq_graph_from_spec(graph_spec.c_str(), &graph.g); st != CTQ_OK)
            return fail(st);
        StringHandle json;
        if (ctq_status st =
                ctq_run_json(graph.g, scenario.c_str(), s_db, seed, with_oracle ? 1 : 0, &json.s);
            st != CTQ_OK)
            return fail(st);
        std::printf("%s\n", json.s);
        return kExitOk;
    }

    if (verify->parsed()) {
        StringHandle table, json;
        int failures = 0;
        if (ctq_status st = ctq_verify(seed, &table.s, &json.s, &failures); st != CTQ_OK)
            return fail(st);
        std::printf("%s", as_json ? json.s : table.s);
        if (as_json)
            std::printf("\n");
        return failures == 0 ? kExitOk : kExitVerifyFailed;
    }

    if (sweep->parsed()) {
        if (ctq_status st = ctq_sweep_csv(s_min, s_max, step, out_path.c_str()); st != CTQ_OK)
            return fail(st);
        const int rows = static_cast<int>(std::floor((s_max - s_min) / step + 1e-9)) + 1;
        std::printf("wrote %s (%d rows)\n", out_path.c_str(), rows);
        return kExitOk;
    }

    if (optimize->parsed()) {
        double g = 0.0, p = 0.0;
        if (ctq_status st = ctq_optimize_weight(s_db, &g, &p); st != CTQ_OK)
            return fail(st);
        std::printf("{\n  \"s_db\": %.17g,\n  \"g_star\": %.17g,\n  \"p_at_g_star\": %.17g\n}\n",
                    s_db, g, p);
        return kExitOk;
    }

    if (describe->parsed()) {
        GraphHandle graph;
        if (ctq_status st = ctq_graph_from_spec(graph_spec.c_str(), &graph.g); st != CTQ_OK)
            return fail(st);
        StringHandle json;
        if (ctq_status st = ctq_graph_describe(graph.g, &json.s); st != CTQ_OK)
            return fail(st);
        std::printf("%s\n", json.s);
        return kExitOk;
    }

    return kExitUsage;
}

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numbers>

#include "ctq/analysis.hpp"
#include "ctq/covsim.hpp"

using namespace ctq;

namespace {

constexpr double kPi = std::numbers::pi;

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

} // namespace

TEST_CASE("normal sampler is seed-deterministic") {
    NormalSampler a(123), b(123), c(124);
    bool all_equal = true, any_diff = false;
    double mean = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double xa = a(), xb = b(), xc = c();
        all_equal = all_equal && xa == xb;
        any_diff = any_diff || xa != xc;
        mean += xa;
    }
    CHECK(all_equal);
    CHECK(any_diff);
    CHECK(std::abs(mean / 1000.0) < 0.15);
}

TEST_CASE("squeezed vacuum construction") {
    const GaussianState vac = GaussianState::vacuum(2);
    CHECK((vac.cov - 0.25 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(vac.mean.cwiseAbs().maxCoeff() == 0.0);

    const GaussianState sq = GaussianState::squeezed_vacuum({10.0, 0.0});
    CHECK(sq.cov(0, 0) == doctest::Approx(0.625).epsilon(1e-12));   // x of mode 1
    CHECK(sq.cov(2, 2) == doctest::Approx(0.025).epsilon(1e-12));   // y of mode 1
    CHECK(sq.cov(1, 1) == doctest::Approx(0.25));
    CHECK(sq.mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sq.is_physical());

    CHECK_FALSE(GaussianState{Eigen::VectorXd::Zero(2),
                              0.01 * Eigen::MatrixXd::Identity(2, 2)}
                    .is_physical());
}

TEST_CASE("symplectic operations") {
    SUBCASE("bogoliubov and beam splitters satisfy the commutation form") {
        CHECK_NOTHROW(SymplecticOp::bogoliubov(ClusterGraph::twelve()));
        CHECK_NOTHROW(SymplecticOp::bogoliubov(ClusterGraph::three(0.7, 1.3, 0.4)));
        CHECK_NOTHROW(SymplecticOp::beam_splitter(5, 1, 3));
        try {
            SymplecticOp(2.0 * Eigen::MatrixXd::Identity(4, 4));
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotSymplectic);
        }
    }

    SUBCASE("compositions stay symplectic") {
        const int n = 12;
        Eigen::MatrixXd s = SymplecticOp::bogoliubov(ClusterGraph::twelve()).matrix();
        s = SymplecticOp::beam_splitter(n, 0, 6).matrix() * s;
        s = SymplecticOp::beam_splitter(n, 2, 9).matrix() * s;
        CHECK_NOTHROW(SymplecticOp(s));  // construction re-validates S Omega S^T
    }

    SUBCASE("identity leaves states alone, vacuum is splitter-invariant") {
        const GaussianState vac = GaussianState::vacuum(2);
        const GaussianState same = apply_symplectic(vac, SymplecticOp::identity(2));
        CHECK((same.cov - vac.cov).cwiseAbs().maxCoeff() == 0.0);
        const GaussianState mixed = apply_symplectic(vac, SymplecticOp::beam_splitter(2, 0, 1));
        CHECK((mixed.cov - vac.cov).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("mode-count mismatch is rejected") {
        CHECK_THROWS_AS(apply_symplectic(GaussianState::vacuum(2), SymplecticOp::identity(3)),
                        Error);
    }
}

TEST_CASE("nullifier certification across the canonical graphs") {
    for (double s : {4.0, 10.0}) {
        for (const ClusterGraph& g :
             {ClusterGraph::twelve(), ClusterGraph::three(1, 1, 0), ClusterGraph::two()}) {
            const Eigen::VectorXd got = nullifier_variances(g, s);
            const GramKit kit = gram_kit(g);
            for (int i = 0; i < g.node_count(); ++i)
                CHECK(got(i) ==
                      doctest::Approx(kit.gram(i, i) * variance_from_db(s)).epsilon(1e-9));
        }
    }
}

TEST_CASE("homodyne conditioning") {
    NormalSampler rng(5);

    SUBCASE("uncorrelated modes stay exactly vacuum") {
        const GaussianState vac = GaussianState::vacuum(2);
        for (double theta : {0.0, kPi / 2, 0.4}) {
            auto [rest, rec] = measure_homodyne(vac, 0, theta, std::nullopt, rng);
            CHECK(rest.modes() == 1);
            CHECK((rest.cov - 0.25 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
                  1e-15);
            CHECK(rec.marginal_variance == doctest::Approx(0.25));
        }
    }

    SUBCASE("conditioning on a correlated cluster reduces variance") {
        GaussianState st = GaussianState::squeezed_vacuum({10.0, 10.0});
        st = apply_symplectic(st, SymplecticOp::bogoliubov(ClusterGraph::two()));
        const double unconditional = st.cov(3, 3);  // y of mode 2
        auto [rest, rec] = measure_homodyne(st, 0, kPi / 2, std::nullopt, rng);
        CHECK(rest.cov(1, 1) < unconditional);
    }

    SUBCASE("conditional covariance is outcome-independent bitwise") {
        GaussianState st = GaussianState::squeezed_vacuum({8.0, 3.0});
        st = apply_symplectic(st, SymplecticOp::beam_splitter(2, 0, 1));
        Eigen::MatrixXd reference;
        for (double m : {-1.0, 0.0, 3.0}) {
            auto [rest, rec] = measure_homodyne(st, 1, 0.3, m, rng);
            CHECK(rec.outcome == m);
            if (reference.size() == 0)
                reference = rest.cov;
            else
                CHECK(bitwise_equal(reference, rest.cov));
        }
    }

    SUBCASE("a squeezed-to-death quadrature degenerates") {
        const GaussianState st = GaussianState::squeezed_vacuum({240.0});
        CHECK_THROWS_AS((void)measure_homodyne(st, 0, kPi / 2, std::nullopt, rng), Error);
    }
}

TEST_CASE("displacement") {
    GaussianState st = GaussianState::squeezed_vacuum({6.0, 6.0});
    st = apply_symplectic(st, SymplecticOp::beam_splitter(2, 0, 1));

    const GaussianState same = displace(st, Eigen::VectorXd::Zero(4));
    CHECK((same.mean - st.mean).cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd shift(4);
    shift << 0.5, -2.0, 3.25, 0.0;
    const GaussianState moved = displace(st, shift);
    CHECK(bitwise_equal(moved.cov, st.cov));
    CHECK((moved.mean - shift).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(displace(st, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("scenario simulation agrees with the symbolic coefficients") {
    const ClusterGraph twelve = ClusterGraph::twelve();

    SUBCASE("cycle at 10 dB reproduces 1/4 + c v") {
        const ScenarioSimulation sim = simulate_scenario(twelve, Scenario::cycle_bca(), 10.0);
        const double v = variance_from_db(10.0);
        REQUIRE(sim.channel_variance.size() == 6);
        for (Eigen::Index i = 0; i < 6; ++i)
            CHECK(sim.channel_variance(i) ==
                  doctest::Approx(0.25 + sim.report.variance_vector(i) * v).epsilon(1e-12));
    }

    SUBCASE("infinite-squeezing limit approaches clean teleportation") {
        const ScenarioSimulation sim = simulate_scenario(twelve, Scenario::cycle_bca(), 60.0);
        for (Eigen::Index i = 0; i < sim.channel_variance.size(); ++i)
            CHECK(sim.channel_variance(i) == doctest::Approx(0.25).epsilon(1e-4));
    }

    SUBCASE("three-node hop at 10 dB") {
        const ScenarioSimulation sim =
            simulate_scenario(ClusterGraph::three(1, 1, 0), Scenario::single_hop3(3), 10.0);
        CHECK(sim.channel_variance(0) == doctest::Approx(0.25 + 3 * 0.025).epsilon(1e-12));
        CHECK(sim.channel_variance(1) == doctest::Approx(0.25 + 2 * 0.025).epsilon(1e-12));
    }

    SUBCASE("weighted hop carries the structural input gain") {
        const double g = 0.5;
        const ScenarioSimulation sim =
            simulate_scenario(ClusterGraph::three(g, g, 0), Scenario::single_hop3(3), 10.0);
        const double v = variance_from_db(10.0);
        const double gain_x = 1.0 / (g * g), gain_y = g * g;
        CHECK(sim.channel_variance(0) ==
              doctest::Approx(gain_x * gain_x * 0.25 + (2 + 1 / (g * g)) * v).epsilon(1e-12));
        CHECK(sim.channel_variance(1) ==
              doctest::Approx(gain_y * gain_y * 0.25 + (1 + g * g) * v).epsilon(1e-12));
    }

    SUBCASE("pure resources make the two-node conditional state exactly vacuum") {
        for (double s : {4.0, 10.0, 16.0}) {
            const ScenarioSimulation sim =
                simulate_scenario(ClusterGraph::two(), Scenario::one_directional2(), s);
            CHECK(sim.conditional_variance(0) == doctest::Approx(0.25).epsilon(1e-9));
            CHECK(sim.conditional_variance(1) == doctest::Approx(0.25).epsilon(1e-9));
        }
    }

    SUBCASE("conditional variance never exceeds the ensemble variance") {
        for (const Scenario& sc : {Scenario::cycle_bca(), Scenario::merge_to_charlie()}) {
            const ScenarioSimulation sim = simulate_scenario(twelve, sc, 8.0);
            for (Eigen::Index i = 0; i < sim.channel_variance.size(); ++i)
                CHECK(sim.conditional_variance(i) <= sim.channel_variance(i) + 1e-12);
        }
    }

    SUBCASE("channel variance = conditional + spread of residual means") {
        const TeleportationReport report = run_protocol(twelve, Scenario::cycle_bca());
        const int runs = 400;
        Eigen::MatrixXd means(runs, 6);
        Eigen::VectorXd conditional;
        for (int k = 0; k < runs; ++k) {
            const ScenarioSimulation sim =
                simulate_scenario(twelve, Scenario::cycle_bca(), 8.0, {}, 1000 + k, &report);
            means.row(k) = sim.corrected_mean;
            conditional = sim.conditional_variance;
        }
        const ScenarioSimulation ref =
            simulate_scenario(twelve, Scenario::cycle_bca(), 8.0, {}, 1, &report);
        for (int i = 0; i < 6; ++i) {
            const double mean = means.col(i).mean();
            const double spread =
                (means.col(i).array() - mean).square().sum() / (runs - 1);
            // Monte Carlo estimate: generous 15% band
            CHECK(conditional(i) + spread ==
                  doctest::Approx(ref.channel_variance(i)).epsilon(0.15));
        }
    }

    SUBCASE("feedforward recenters a coherent input (200 sampled runs)") {
        InputSpec inputs;
        inputs["a"] = {0.7, -0.3, 0.0};
        const TeleportationReport report = run_protocol(twelve, Scenario::cycle_bca());
        const int runs = 200;
        // node 10 receives a's state: rows X10 (index 2) and Y10 (index 5)
        double sum_x = 0.0, sum_y = 0.0, sumsq_x = 0.0, sumsq_y = 0.0;
        for (int k = 0; k < runs; ++k) {
            const ScenarioSimulation sim =
                simulate_scenario(twelve, Scenario::cycle_bca(), 10.0, inputs, 500 + k, &report);
            REQUIRE(sim.quadrature_names[2] == "X10");
            REQUIRE(sim.quadrature_names[5] == "Y10");
            sum_x += sim.corrected_mean(2);
            sum_y += sim.corrected_mean(5);
            sumsq_x += sim.corrected_mean(2) * sim.corrected_mean(2);
            sumsq_y += sim.corrected_mean(5) * sim.corrected_mean(5);
        }
        const double mean_x = sum_x / runs, mean_y = sum_y / runs;
        const double sd_x = std::sqrt(sumsq_x / runs - mean_x * mean_x);
        const double sd_y = std::sqrt(sumsq_y / runs - mean_y * mean_y);
        CHECK(std::abs(mean_x - 0.7) < 3.0 * sd_x / std::sqrt(double(runs)) + 1e-6);
        CHECK(std::abs(mean_y - (-0.3)) < 3.0 * sd_y / std::sqrt(double(runs)) + 1e-6);
    }
}

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "ctq/symbolic.hpp"

using namespace ctq;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

bool expr_close(const QuadExpr& a, const QuadExpr& b, double tol = 1e-12) {
    QuadExpr diff = a;
    diff.add_scaled(b, -1.0);
    double worst = 0.0;
    for (const auto& [label, coeff] : diff.terms())
        worst = std::max(worst, std::abs(coeff));
    return worst <= tol;
}

} // namespace

TEST_CASE("quad expressions prune stored zeros") {
    QuadExpr e;
    e.add(res_x(1), 1.0);
    e.add(res_x(1), -1.0);
    CHECK(e.empty());

    e.add(input_x("a"), 0.5);
    CHECK(e.coefficient(input_x("a")) == doctest::Approx(0.5).epsilon(1e-12));
    e.add(res_y(3), 1e-13);
    CHECK(e.coefficient(res_y(3)) == 0.0);
    CHECK(e.size() == 1);
}

TEST_CASE("cluster expressions follow the adjacency matrix") {
    SUBCASE("twelve-node, mode 4") {
        const ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::twelve());
        const auto& m4 = sys.mode("4");
        QuadExpr want_x(res_x(4));
        want_x.add(res_y(8), -1.0);
        QuadExpr want_y(res_y(4));
        want_y.add(res_x(8), 1.0);
        CHECK(expr_close(m4.x, want_x));
        CHECK(expr_close(m4.y, want_y));

        // node 8 carries the -1 weights: X8 = xr8 - yr4 - yr5 + yr9 + yr10
        const auto& m8 = sys.mode("8");
        CHECK(m8.x.coefficient(res_y(9)) == doctest::Approx(1.0));
        CHECK(m8.x.coefficient(res_y(4)) == doctest::Approx(-1.0));
        CHECK(m8.y.coefficient(res_x(9)) == doctest::Approx(-1.0));
    }
    SUBCASE("edgeless graph: bare resource quadratures") {
        const ModeSystem sys =
            ModeSystem::cluster_expressions(ClusterGraph::validated(Eigen::MatrixXd::Zero(3, 3)));
        for (int i = 1; i <= 3; ++i) {
            CHECK(expr_close(sys.mode(std::to_string(i)).x, QuadExpr(res_x(i))));
            CHECK(expr_close(sys.mode(std::to_string(i)).y, QuadExpr(res_y(i))));
        }
    }
    SUBCASE("weighted three-node, mode 1") {
        const ModeSystem sys =
            ModeSystem::cluster_expressions(ClusterGraph::three(0.7, 1.3, 0.4));
        const auto& m1 = sys.mode("1");
        CHECK(m1.x.coefficient(res_x(1)) == doctest::Approx(1.0));
        CHECK(m1.x.coefficient(res_y(2)) == doctest::Approx(-0.7));
        CHECK(m1.x.coefficient(res_y(3)) == doctest::Approx(-1.3));
        CHECK(m1.y.coefficient(res_x(2)) == doctest::Approx(0.7));
        CHECK(m1.y.coefficient(res_x(3)) == doctest::Approx(1.3));
    }
}

TEST_CASE("beam-splitter attachment") {
    ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::twelve());
    sys.attach_input("a", 1);

    const auto& ain = sys.mode("a_in");
    // (x_a + xr1 - yr2 - yr3 - yr7)/sqrt(2)
    CHECK(ain.x.coefficient(input_x("a")) == doctest::Approx(kInvSqrt2));
    CHECK(ain.x.coefficient(res_x(1)) == doctest::Approx(kInvSqrt2));
    CHECK(ain.x.coefficient(res_y(2)) == doctest::Approx(-kInvSqrt2));
    CHECK(ain.x.coefficient(res_y(3)) == doctest::Approx(-kInvSqrt2));
    CHECK(ain.x.coefficient(res_y(7)) == doctest::Approx(-kInvSqrt2));
    CHECK(ain.x.size() == 5);

    SUBCASE("the splitter is an involution") {
        const auto& a1 = sys.mode("a_1");
        QuadExpr plus = ain.x;
        plus.add_scaled(a1.x, 1.0);
        plus = plus.scaled(kInvSqrt2);
        CHECK(expr_close(plus, QuadExpr(input_x("a"))));

        QuadExpr minus = ain.x;
        minus.add_scaled(a1.x, -1.0);
        minus = minus.scaled(kInvSqrt2);
        QuadExpr node1_x(res_x(1));
        node1_x.add(res_y(2), -1.0);
        node1_x.add(res_y(3), -1.0);
        node1_x.add(res_y(7), -1.0);
        CHECK(expr_close(minus, node1_x));
    }

    SUBCASE("consumed and duplicate attachments are rejected") {
        try {
            sys.attach_input("b", 1);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NodeAlreadyMeasured);
        }
        try {
            sys.attach_input("a", 2);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DuplicateInputTag);
        }
        sys.homodyne_equation("5", 0.0);
        try {
            sys.attach_input("e", 5);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NodeAlreadyMeasured);
        }
    }
}

TEST_CASE("beam splitter preserves per-label energy") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4;
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                w(i, j) = w(j, i) = dist(rng);
        ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::validated(w));
        const QuadExpr before_node = sys.mode("2").x;
        sys.attach_input("a", 2);
        const QuadExpr& out1 = sys.mode("a_in").x;
        const QuadExpr& out2 = sys.mode("a_1").x;

        QuadExpr all = before_node;
        all.add(input_x("a"), 1.0);
        for (const auto& [label, coeff] : all.terms()) {
            const double before = label == input_x("a")
                                      ? 1.0
                                      : before_node.coefficient(label) * before_node.coefficient(label);
            const double after = out1.coefficient(label) * out1.coefficient(label) +
                                 out2.coefficient(label) * out2.coefficient(label);
            CHECK(after == doctest::Approx(before).epsilon(1e-12));
        }
    }
}

TEST_CASE("homodyne equations select the measured ray") {
    ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::twelve());

    sys.homodyne_equation("4", 0.0);
    CHECK(expr_close(sys.equations()[0].lhs, sys.mode("4").x));

    sys.homodyne_equation("5", kPi / 2);
    CHECK(expr_close(sys.equations()[1].lhs, sys.mode("5").y));  // cos(pi/2) pruned exactly

    sys.homodyne_equation("6", kPi / 4);
    QuadExpr want = sys.mode("6").x;
    want.add_scaled(sys.mode("6").y, 1.0);
    want = want.scaled(kInvSqrt2);
    CHECK(expr_close(sys.equations()[2].lhs, want));

    try {
        sys.homodyne_equation("4", 1.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ModeAlreadyMeasured);
    }
}

TEST_CASE("unmeasured cluster expressions never contain photocurrents") {
    ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::twelve());
    sys.attach_input("a", 1);
    sys.homodyne_equation("a_in", 0.3);
    for (const auto& mode : sys.modes())
        for (const auto& [label, coeff] : mode.x.terms())
            CHECK(label.kind != LabelKind::Photocurrent);
}

TEST_CASE("solving the measurement system") {
    SUBCASE("the full cyclic system is solvable and sound") {
        ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::twelve());
        sys.attach_input("a", 1);
        sys.attach_input("b", 2);
        sys.attach_input("c", 3);
        const std::vector<std::pair<std::string, double>> schedule = {
            {"a_in", 0.0}, {"a_1", kPi / 2}, {"b_in", 0.0}, {"b_1", kPi / 2},
            {"c_in", 0.0}, {"c_1", kPi / 2}, {"4", 0.0},    {"5", kPi / 2},
            {"6", kPi / 2}, {"7", kPi / 2},  {"11", 0.0},   {"12", 0.0}};
        for (const auto& [name, theta] : schedule)
            sys.homodyne_equation(name, theta);

        const SubstitutionMap sub = solve_measurements(sys);
        CHECK(sub.size() == 12);  // all twelve anti-squeezed quadratures pivoted

        for (const auto& eq : sys.equations()) {
            QuadExpr residual = substitute(eq.lhs, sub);
            residual.add(photocurrent(eq.photocurrent), -1.0);
            double worst = 0.0;
            for (const auto& [label, coeff] : residual.terms())
                worst = std::max(worst, std::abs(coeff));
            CHECK(worst < 1e-9);
        }
    }

    SUBCASE("three-node single hop: three equations, three unknowns") {
        ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::three(1, 1, 0));
        sys.attach_input("a", 1);
        sys.homodyne_equation("a_in", std::atan(-1.0));
        sys.homodyne_equation("a_1", std::atan(1.0));
        sys.homodyne_equation("2", 0.0);
        CHECK(solve_measurements(sys).size() == 3);
    }

    SUBCASE("duplicate measurement rows are singular") {
        ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::two());
        sys.homodyne_equation("1", 0.0);
        std::vector<LinearEquation> eqs = sys.equations();
        LinearEquation duplicate = eqs[0];
        duplicate.photocurrent = 1;
        eqs.push_back(duplicate);
        try {
            solve_equations(eqs);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SingularSystem);
        }
    }
}

TEST_CASE("classification") {
    ModeSystem sys = ModeSystem::cluster_expressions(ClusterGraph::two());
    sys.attach_input("a", 1);
    sys.homodyne_equation("a_in", 3 * kPi / 4);
    sys.homodyne_equation("a_1", kPi / 4);
    const SubstitutionMap sub = solve_measurements(sys);

    SUBCASE("teleporting output classifies clean") {
        const TeleportationTerm term = classify_output(sys.mode("2").x, sub, 2);
        CHECK(term.clean);
        CHECK(term.input_tag == "a");
        CHECK(term.input_kind == LabelKind::InputX);
        CHECK(term.input_gain == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(term.error_row(0) == doctest::Approx(-2.0));
        CHECK(term.error_row(1) == doctest::Approx(0.0));
    }

    SUBCASE("a pure resource expression is not teleporting") {
        QuadExpr noise(res_y(1), 2.0);
        const TeleportationTerm term = classify_output(noise, sub, 2);
        CHECK_FALSE(term.clean);
        CHECK(term.input_tag.empty());
        CHECK(term.error_row(0) == doctest::Approx(2.0));
    }

    SUBCASE("an unsolved anti-squeezed label lands in the residual") {
        QuadExpr stray(res_x(2), 1.0);
        SubstitutionMap empty;
        const TeleportationTerm term = classify_output(stray, empty, 2);
        CHECK_FALSE(term.clean);
        CHECK(term.residual.coefficient(res_x(2)) == doctest::Approx(1.0));
    }

    SUBCASE("decomposition is linear") {
        const QuadExpr u = sys.mode("2").x;
        const QuadExpr v = sys.mode("2").y;
        const double alpha = 0.6, beta = -1.7;
        QuadExpr combo = u.scaled(alpha);
        combo.add_scaled(v, beta);

        const TeleportationTerm tu = classify_output(u, sub, 2);
        const TeleportationTerm tv = classify_output(v, sub, 2);
        const TeleportationTerm tc = classify_output(combo, sub, 2);

        CHECK((tc.error_row - (alpha * tu.error_row + beta * tv.error_row)).cwiseAbs().maxCoeff() <
              1e-12);
        for (const auto& [k, coeff] : tc.gains) {
            const double want = alpha * (tu.gains.count(k) ? tu.gains.at(k) : 0.0) +
                                beta * (tv.gains.count(k) ? tv.gains.at(k) : 0.0);
            CHECK(coeff == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

#include <doctest.h>

#include <cmath>

#include "odediscover/pareto.hpp"

using namespace odediscover::pareto;

namespace {

// log(sol) = log(lambda), log(reg) = -log(min(lambda, kink)); sharp corner at the kink.
Evaluator kinked(double kink) {
    return [kink](double lam) {
        ParetoCurvePoint p;
        p.sol_residual = lam;
        p.reg_residual = 1.0 / std::min(lam, kink);
        return p;
    };
}

}  // namespace

TEST_CASE("menger curvature sign and magnitude") {
    CHECK(menger_curvature(0, 0, 1, 0, 2, 0) == 0.0);
    CHECK(menger_curvature(1, 0, 0, 1, -1, 0) == doctest::Approx(1.0));   // unit circle, left turn
    CHECK(menger_curvature(-1, 0, 0, 1, 1, 0) == doctest::Approx(-1.0));  // clockwise
}

TEST_CASE("straight line has no corner") {
    Evaluator line = [](double lam) {
        ParetoCurvePoint p;
        p.sol_residual = lam;
        p.reg_residual = 1.0 / lam;
        return p;
    };
    const auto r = corner_search(line, 1e-6, 1.0);
    CHECK(r.no_corner);
    CHECK(r.lambda_corner == 1e-6);
}

TEST_CASE("kinked curve corner is located") {
    const auto r = corner_search(kinked(1e-2), 1e-6, 1.0);
    CHECK_FALSE(r.no_corner);
    CHECK(r.lambda_corner > 0.5e-2);
    CHECK(r.lambda_corner < 2e-2);
    CHECK(r.evaluations <= 40);
}

TEST_CASE("vertical-then-flat corner") {
    Evaluator l = [](double lam) {
        ParetoCurvePoint p;
        p.sol_residual = std::max(lam, 1e-3);
        p.reg_residual = 1.0 / std::min(lam, 1e-3);
        return p;
    };
    const auto r = corner_search(l, 1e-6, 1.0);
    CHECK_FALSE(r.no_corner);
    CHECK(r.lambda_corner > 0.5e-3);
    CHECK(r.lambda_corner < 2e-3);
}

TEST_CASE("golden section contracts the bracket") {
    Evaluator smooth = [](double lam) {
        ParetoCurvePoint p;
        p.sol_residual = 1.0 + lam;
        p.reg_residual = 1.0 + 1.0 / lam;
        return p;
    };
    const auto r = corner_search(smooth, 1e-6, 1.0, 40);
    CHECK(r.evaluations <= 40);
    const auto& last = r.brackets.back();
    CHECK((last[3] - last[0]) / last[3] < 0.01);
    for (std::size_t i = 1; i < r.brackets.size(); ++i) {
        CHECK(r.brackets[i][0] >= r.brackets[i - 1][0]);
        CHECK(r.brackets[i][3] <= r.brackets[i - 1][3]);
    }
    CHECK(r.trace.size() == std::size_t(r.evaluations));
}

TEST_CASE("gamma selection stays inside its window") {
    const double gexp = 0.35;
    Evaluator l = [gexp](double g) {
        ParetoCurvePoint p;
        p.sol_residual = std::max(g, 2.0 * gexp);
        p.reg_residual = 1.0 / std::min(g, 2.0 * gexp);
        return p;
    };
    const auto sel = gamma_pareto(l, gexp);
    CHECK_FALSE(sel.no_corner);
    CHECK(sel.gamma >= 0.1 * gexp);
    CHECK(sel.gamma <= 10.0 * gexp);
    CHECK(sel.gamma == doctest::Approx(2.0 * gexp).epsilon(0.5));

    Evaluator flat = [](double) {
        ParetoCurvePoint p;
        p.sol_residual = 1.0;
        p.reg_residual = 1.0;
        return p;
    };
    const auto fb = gamma_pareto(flat, gexp);
    CHECK(fb.no_corner);
    CHECK(fb.gamma == gexp);
}

TEST_CASE("corner search argument checks") {
    CHECK_THROWS(corner_search(kinked(1e-2), 0.0, 1.0));
    CHECK_THROWS(corner_search(kinked(1e-2), 1.0, 0.5));
    CHECK_THROWS(gamma_pareto(kinked(1e-2), 0.0));
}

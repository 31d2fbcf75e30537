#include <doctest.h>

#include <cmath>

#include "odediscover/basis.hpp"
#include "odediscover/denoise.hpp"
#include "odediscover/errors.hpp"
#include "odediscover/operators.hpp"
#include "odediscover/regression.hpp"
#include "odediscover/rng.hpp"
#include "odediscover/systems.hpp"

using namespace odediscover;
using namespace odediscover::regression;

namespace {

Mat random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    Mat a(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) a(i, j) = rng::normal(seed, std::uint64_t(j), std::uint64_t(i));
    return a;
}

struct Affine {
    Vec t, u;
    Mat theta, phi;
};

// u' = 0.8 on [0, 2], library {1, u}.
Affine affine_case(Eigen::Index n) {
    Affine a;
    a.t = uniform_grid(n, 2.0);
    a.u = (0.8 * a.t.array() + 0.25).matrix();
    Mat states(n, 1);
    states.col(0) = a.u;
    a.theta = basis::evaluate_library(basis::enumerate_basis(1, 1), states);
    a.phi = basis::integrated_library(a.theta, operators::build_trapezoid(n, 2.0));
    return a;
}

}  // namespace

TEST_CASE("initial derivative on an affine trajectory") {
    const auto a = affine_case(60);
    const auto init = initial_derivative_fit(a.theta, a.phi, a.u);
    CHECK((init.u_dot - Vec::Constant(60, 0.8)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(init.u0 == doctest::Approx(0.25));
    CHECK(initial_derivative(a.theta, a.phi, Vec::Zero(60)).norm() < 1e-14);
}

TEST_CASE("smoothing radius") {
    const operators::DifferenceStack d(10, 1.0);
    CHECK(smoothing_radius(d, Vec::Zero(10)) == 0.0);
    Vec lin = Vec::LinSpaced(10, 0.0, 9.0) * 0.5;
    const double expect = std::sqrt(lin.squaredNorm() + 9 * 0.25);
    CHECK(smoothing_radius(d, lin) == doctest::Approx(expect));
}

TEST_CASE("theory radius") {
    CHECK(gamma_theory(0.0, 6) == 0.0);
    CHECK(gamma_theory(0.1, 6) == doctest::Approx(0.26457513));
    const auto p = basis::enumerate_basis(2, 4).size();
    CHECK(p == 15);
    CHECK(gamma_theory(1.0, p) == doctest::Approx(4.0));
}

TEST_CASE("SOCP trivial solutions") {
    const auto a = affine_case(40);
    ConeProgram prog;
    prog.objective_map = coefficient_map(a.theta);
    prog.smooth_radius = 1.0;
    prog.target = Vec::Zero(40);
    prog.data_radius = 0.1;
    prog.t_end = 2.0;
    auto r = solve_socp(prog);
    CHECK(r.u_dot.norm() < 1e-8);
    CHECK(std::abs(r.u0) < 1e-8);
    CHECK(r.objective < 1e-8);

    prog.target = a.u;
    prog.data_radius = a.u.norm() * 1.01;
    prog.smooth_radius = 1e6;
    r = solve_socp(prog);
    CHECK(r.objective < 1e-8);
}

TEST_CASE("SOCP recovers the affine derivative and respects the cones") {
    const auto a = affine_case(80);
    const operators::DifferenceStack d(80, 2.0 / 79.0);
    const auto init = initial_derivative_fit(a.theta, a.phi, a.u);
    ConeProgram prog;
    prog.objective_map = coefficient_map(a.theta);
    prog.smooth_radius = smoothing_radius(d, init.u_dot);
    prog.target = operators::Projector(a.phi).apply(a.u);
    prog.data_radius = 1e-6;
    prog.t_end = 2.0;
    const auto r = solve_socp(prog);
    CHECK(r.status == conic::Status::optimal);
    CHECK(r.smooth_violation <= 1e-8 * std::max(1.0, prog.smooth_radius));
    CHECK(r.data_violation <= 1e-8 * std::max(1.0, prog.target.norm()));
    CHECK((r.u_dot - Vec::Constant(80, 0.8)).norm() / std::sqrt(80.0) < 1e-4);
}

TEST_CASE("irw weights") {
    bool fell = false;
    Vec c(3);
    c << 2, 0, -1;
    const Vec w = irw_weights(c, 1e-4, &fell);
    CHECK_FALSE(fell);
    CHECK(w(0) == doctest::Approx(1.0 / (2 + 2e-4)));
    CHECK(w(1) == doctest::Approx(1.0 / 2e-4));
    CHECK(irw_weights(Vec::Zero(3), 1e-4, &fell).isOnes());
    CHECK(fell);
}

TEST_CASE("clean Duffing recovery with one reweighting pass") {
    const auto sys = systems::builtin_system("duffing_ps2");
    const Eigen::Index n = 500;
    const auto tr = systems::simulate(sys, sys.default_ic, 10.0, n);
    const Mat theta = basis::evaluate_library(sys.basis, tr.values);
    const Mat phi = basis::integrated_library(theta, operators::build_trapezoid(n, 10.0));
    const Mat cmap = coefficient_map(theta);
    const operators::DifferenceStack d(n, 10.0 / double(n - 1));
    for (int k = 0; k < 2; ++k) {
        const Vec u = tr.values.col(k);
        const double C = smoothing_radius(d, initial_derivative_fit(theta, phi, u).u_dot);
        const double floor = 1e-12 * std::max(1.0, u.norm());
        const auto r = irw_socp(u, theta, phi, cmap, {floor}, C, 1);
        const Vec truth = sys.true_coefficients.row(k).transpose();
        CHECK((r.coefficients - truth).norm() / truth.norm() < 1e-3);
        CHECK(r.irw_iterations == 1);
    }
}

TEST_CASE("tikhonov differentiation") {
    const Eigen::Index n = 50;
    const auto trap = operators::build_trapezoid(n, 1.0);
    const auto d = operators::build_difference_stack(n, 1.0);
    const Vec v = (3.0 * uniform_grid(n, 1.0).array()).sin().matrix();
    const Vec u = trap.apply(v);

    SUBCASE("lambda = 0 inverts T up to the free first entry") {
        const Vec ud = tikhonov_derivative(u, trap, d, 0.0);
        CHECK((trap.apply(ud) - u).norm() < 1e-10);
        // The null space of T is spanned by the alternating vector.
        Vec alt(n);
        for (Eigen::Index i = 0; i < n; ++i) alt(i) = i % 2 ? -1.0 : 1.0;
        const Vec r = ud - v;
        CHECK((r - (r.dot(alt) / double(n)) * alt).norm() < 1e-8);
        CHECK(std::abs(ud.dot(alt)) < 1e-8 * ud.norm());
    }
    SUBCASE("first-order optimality") {
        for (double lam : {1e-6, 1e-3, 1.0}) {
            const Vec ud = tikhonov_derivative(u, trap, d, lam);
            const Vec grad = trap.apply_transpose(trap.apply(ud) - u) + lam * d.apply_transpose(d.apply(ud));
            CHECK(grad.norm() < 1e-8 * std::max(1.0, u.norm()));
        }
    }
    SUBCASE("huge lambda shrinks to zero") {
        CHECK(tikhonov_derivative(u, trap, d, 1e12).norm() < 1e-6);
    }
}

TEST_CASE("lasso") {
    Vec b(2);
    b << 3, 1;
    const auto r = weighted_lasso(Mat::Identity(2, 2), b, 2.0, Vec::Ones(2));
    CHECK(r.c(0) == doctest::Approx(2.0));
    CHECK(r.c(1) == 0.0);

    const Mat a = random_matrix(30, 5, 1);
    const Vec y = random_matrix(30, 1, 2).col(0);
    const Vec ls = operators::pseudoinverse_apply(a, y);
    CHECK((weighted_lasso(a, y, 0.0, Vec::Ones(5)).c - ls).norm() < 1e-8);
    const double lam_max = 2.0 * (a.transpose() * y).cwiseAbs().maxCoeff();
    CHECK(weighted_lasso(a, y, lam_max, Vec::Ones(5)).c.isZero());
}

TEST_CASE("lasso subgradient optimality") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Mat a = random_matrix(40, 8, seed + 10);
        const Vec y = random_matrix(40, 1, seed + 20).col(0);
        Vec w(8);
        for (int j = 0; j < 8; ++j) w(j) = 0.5 + std::abs(rng::normal(seed, 99, std::uint64_t(j)));
        const double lam = 0.3 * 2.0 * (a.transpose() * y).cwiseAbs().maxCoeff();
        const Vec c = weighted_lasso(a, y, lam, w, 1e-12).c;
        const Vec g = 2.0 * a.transpose() * (a * c - y);
        for (int j = 0; j < 8; ++j) {
            const double bound = lam * w(j);
            if (c(j) != 0.0)
                CHECK(std::abs(g(j) + bound * (c(j) > 0 ? 1.0 : -1.0)) < 1e-4 * bound);
            else
                CHECK(std::abs(g(j)) <= bound * (1 + 1e-4));
        }
    }
}

TEST_CASE("irw lasso finds a sparse signal") {
    const Mat a = random_matrix(60, 10, 3);
    Vec truth = Vec::Zero(10);
    truth(2) = 1.5;
    truth(7) = -0.8;
    const Vec y = a * truth;
    const Vec c = irw_lasso(a, y, 1e-3, 4);
    CHECK((c - truth).norm() < 1e-3);
}

TEST_CASE("stls limits") {
    const Mat a = random_matrix(20, 4, 6);
    const Vec y = random_matrix(20, 1, 7).col(0);
    const Vec ls = operators::pseudoinverse_apply(a, y);
    CHECK((stls(a, y, 0.0) - ls).norm() < 1e-10);
    CHECK(stls(a, y, ls.cwiseAbs().maxCoeff() * 1.01).isZero());
    Vec b(2);
    b << 5, 0.01;
    const Vec c = stls(Mat::Identity(2, 2), b, 0.1);
    CHECK(c(0) == doctest::Approx(5.0));
    CHECK(c(1) == 0.0);
    // Upper bound trims large entries too.
    const Vec capped = stls(Mat::Identity(2, 2), b, 0.001, 1.0);
    CHECK(capped(0) == 0.0);
}

TEST_CASE("mstls picks the sparse model on exact data") {
    const Mat h = random_matrix(40, 6, 8);
    Vec truth = Vec::Zero(6);
    truth(1) = 0.9;
    truth(4) = -0.4;
    const auto sel = mstls_select(h, h * truth, default_mstls_grid());
    CHECK((sel.c - truth).norm() < 1e-10);
    CHECK(sel.losses.size() == default_mstls_grid().size());
    CHECK(default_mstls_grid().front() == doctest::Approx(1e-4));
    CHECK(default_mstls_grid().back() == doctest::Approx(1.0));
}

#include <doctest.h>

#include <cmath>

#include "odediscover/conic.hpp"
#include "odediscover/rng.hpp"

using namespace odediscover;
using namespace odediscover::conic;

namespace {

SpMat sparse(const Mat& m) { return m.sparseView(); }

bool in_cone(const Vec& x, const ConeDims& dims, double tol) {
    for (Eigen::Index i = 0; i < dims.nonneg; ++i)
        if (x(i) < -tol) return false;
    Eigen::Index off = dims.nonneg;
    for (auto q : dims.soc) {
        if (x(off) + tol < x.segment(off + 1, q - 1).norm()) return false;
        off += q;
    }
    return true;
}

// Optimality conditions checked independently of the solver's own reports.
void check_kkt(const Problem& p, const Solution& s, double tol) {
    CHECK(s.status == Status::optimal);
    CHECK((p.G * s.x + s.s - p.h).norm() <= tol * (1 + p.h.norm()));
    if (p.A.rows()) CHECK((p.A * s.x - p.b).norm() <= tol * (1 + p.b.norm()));
    Vec dual = p.G.transpose() * s.z + p.c;
    if (p.A.rows()) dual += p.A.transpose() * s.y;
    CHECK(dual.norm() <= tol * (1 + p.c.norm()));
    CHECK(in_cone(s.s, p.dims, tol));
    CHECK(in_cone(s.z, p.dims, tol));
    CHECK(std::abs(s.s.dot(s.z)) <= tol * (1 + std::abs(p.c.dot(s.x))));
    // Strong duality: c'x = -h'z - b'y.
    double dobj = -p.h.dot(s.z);
    if (p.A.rows()) dobj -= p.b.dot(s.y);
    CHECK(std::abs(p.c.dot(s.x) - dobj) <= 10 * tol * (1 + std::abs(dobj)));
}

}  // namespace

TEST_CASE("cone algebra") {
    ConeDims dims{2, {3}};
    CHECK(dims.total() == 5);
    CHECK(dims.degree() == 3);
    Vec e(5);
    e << 1, 1, 1, 0, 0;
    Vec x(5);
    x << 2, 3, 5, 1, -2;
    CHECK((detail::jordan_product(e, x, dims) - x).norm() < 1e-15);
    const Vec l = (Vec(5) << 1.5, 0.5, 3, 1, 0.5).finished();
    const Vec u = detail::jordan_product(l, x, dims);
    CHECK((detail::jordan_divide(l, u, dims) - x).norm() < 1e-12);

    Vec dx(5);
    dx << -1, 0, -1, 0, 0;
    CHECK(detail::max_step(e, dx, dims) == doctest::Approx(1.0));
    CHECK(std::isinf(detail::max_step(e, Vec::Zero(5), dims)));
}

TEST_CASE("nesterov-todd scaling identities") {
    ConeDims dims{2, {3, 4}};
    Vec s(9), z(9);
    s << 1, 2, 3, 1, 0.5, 2, 0.3, -0.4, 0.5;
    z << 4, 0.5, 2, -0.7, 0.2, 1.5, -0.2, 0.1, 0.7;
    const auto w = detail::nt_scaling(s, z, dims);
    const Vec wz = detail::apply_w(w, z, dims, false);
    const Vec winv_s = detail::apply_w(w, s, dims, true);
    CHECK((wz - winv_s).norm() < 1e-12);
    CHECK((detail::apply_w(w, wz, dims, true) - z).norm() < 1e-12);
}

TEST_CASE("small SOCP agrees with a reference interior point solution") {
    Problem p;
    p.c = (Vec(3) << 1, 2, -1).finished();
    Mat g = Mat::Zero(7, 3);
    g.topRows(3) = -Mat::Identity(3, 3);
    g.bottomRows(3) = -Mat::Identity(3, 3);
    p.G = sparse(g);
    p.h = (Vec(7) << 1, 1, 1, 2, -1, 0.5, 0).finished();
    p.A = sparse(Mat::Ones(1, 3));
    p.b = Vec::Constant(1, 0.5);
    p.dims = ConeDims{3, {4}};
    const auto s = solve(p);
    check_kkt(p, s, 1e-7);
    // Reference values from an independent conic solver.
    CHECK(s.x(0) == doctest::Approx(-0.096291201784).epsilon(1e-6));
    CHECK(s.x(1) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(s.x(2) == doctest::Approx(1.596291201783).epsilon(1e-6));
    CHECK(s.primal_objective == doctest::Approx(-3.692582403566).epsilon(1e-7));
}

TEST_CASE("linear program with an equality") {
    // max x + y s.t. x + 2y <= 4, 2x + y <= 4, x - y = 0.
    Problem p;
    p.c = (Vec(2) << -1, -1).finished();
    Mat g(4, 2);
    g << 1, 2, 2, 1, -1, 0, 0, -1;
    p.G = sparse(g);
    p.h = (Vec(4) << 4, 4, 0, 0).finished();
    p.A = sparse((Mat(1, 2) << 1, -1).finished());
    p.b = Vec::Zero(1);
    p.dims = ConeDims{4, {}};
    const auto s = solve(p);
    check_kkt(p, s, 1e-7);
    CHECK(s.x(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("random feasible conic programs satisfy the KKT conditions") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Eigen::Index n = 6;
        // Feasible by construction: s0 strictly in the cone at x0; bounded via a norm ball.
        ConeDims dims{4, {n + 1, 3}};
        Mat g = Mat::Zero(dims.total(), n);
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng::normal(seed, 1, std::uint64_t(i * n + j));
        g.block(5, 0, n, n) = -Mat::Identity(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            g(4 + n + 1, j) = rng::normal(seed, 2, std::uint64_t(j));
            g(4 + n + 2, j) = rng::normal(seed, 3, std::uint64_t(j));
        }
        Vec h = Vec::Zero(dims.total());
        h.head(4).setConstant(1.0);
        h(4) = 3.0;
        h(4 + n + 1) = 2.0;
        Problem p;
        p.c = Vec(n);
        for (Eigen::Index j = 0; j < n; ++j) p.c(j) = rng::normal(seed, 4, std::uint64_t(j));
        p.G = sparse(g);
        p.h = h;
        p.A = SpMat(0, n);
        p.b = Vec(0);
        p.dims = dims;
        const auto s = solve(p);
        check_kkt(p, s, 1e-6);
    }
}

#include <doctest.h>

#include <cmath>

#include "odediscover/basis.hpp"
#include "odediscover/rng.hpp"

using namespace odediscover;
using namespace odediscover::basis;

TEST_CASE("basis enumeration order and size") {
    const auto b = enumerate_basis(2, 2);
    const std::vector<MultiIndex> expect{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(b.indices == expect);
    CHECK(enumerate_basis(1, 0).indices == std::vector<MultiIndex>{{0}});
    CHECK(enumerate_basis(3, 3).size() == 20);
    CHECK(enumerate_basis(2, 4).size() == 15);
    CHECK(b.position({1, 1}) == 4);
    CHECK(b.position({3, 0}) == -1);
    CHECK(b.term_name(0) == "1");
    CHECK(b.term_name(4) == "u1*u2");
    CHECK(b.term_name(5) == "u2^2");
}

TEST_CASE("library evaluation") {
    const auto b = enumerate_basis(2, 2);
    Mat u(1, 2);
    u << 2, 3;
    Mat expect(1, 6);
    expect << 1, 2, 3, 4, 6, 9;
    CHECK((evaluate_library(b, u) - expect).norm() == 0.0);

    const Mat zero = evaluate_library(b, Mat::Zero(4, 2));
    CHECK(zero.col(0).isOnes());
    CHECK(zero.rightCols(5).isZero());
    CHECK(evaluate_library(enumerate_basis(3, 3), Mat::Ones(5, 3)).isOnes());
}

TEST_CASE("gaussian moments") {
    CHECK(gaussian_moment({4}, 1.0) == doctest::Approx(3.0));
    CHECK(gaussian_moment({1, 2}, 0.7) == 0.0);
    CHECK(gaussian_moment({2, 2}, 0.5) == doctest::Approx(0.0625));
    CHECK(gaussian_moment({6}, 2.0) == doctest::Approx(15.0 * 64.0));
    Vec s(2);
    s << 0.5, 2.0;
    CHECK(gaussian_moment({2, 2}, s) == doctest::Approx(0.25 * 4.0));
    CHECK(gaussian_moment({0, 0}, s) == 1.0);
}

TEST_CASE("partial order and binomials") {
    CHECK(strictly_below({0, 1}, {1, 1}));
    CHECK_FALSE(strictly_below({1, 1}, {1, 1}));
    CHECK_FALSE(strictly_below({2, 0}, {1, 1}));
    CHECK(multi_binomial({3, 2}, {1, 1}) == doctest::Approx(6.0));
}

TEST_CASE("unbiased library unrolls to the closed forms") {
    const auto b = enumerate_basis(1, 4);
    Mat u(3, 1);
    u << 1.3, -0.4, 2.0;
    const double s = 0.5, s2 = s * s;
    const Mat th = evaluate_unbiased_library(b, u, s);
    for (int i = 0; i < 3; ++i) {
        const double x = u(i, 0);
        CHECK(th(i, 0) == doctest::Approx(1.0));
        CHECK(th(i, 1) == doctest::Approx(x));
        CHECK(th(i, 2) == doctest::Approx(x * x - s2));
        CHECK(th(i, 3) == doctest::Approx(x * x * x - 3 * s2 * x));
        CHECK(th(i, 4) == doctest::Approx(std::pow(x, 4) - 6 * s2 * x * x + 3 * s2 * s2));
    }
    CHECK((evaluate_unbiased_library(b, u, 0.0) - evaluate_library(b, u)).norm() == 0.0);
}

TEST_CASE("unbiased library removes noise bias in expectation") {
    const auto b = enumerate_basis(2, 3);
    Mat clean(1, 2);
    clean << 0.8, -1.1;
    const Mat truth = evaluate_library(b, clean);
    const int draws = 40000;
    const double s = 0.4;
    Mat sum = Mat::Zero(1, b.size()), sq = Mat::Zero(1, b.size());
    for (int r = 0; r < draws; ++r) {
        Mat u = clean;
        u(0, 0) += s * rng::normal(9, 0, std::uint64_t(r));
        u(0, 1) += s * rng::normal(9, 1, std::uint64_t(r));
        const Mat th = evaluate_unbiased_library(b, u, s);
        sum += th;
        sq += th.cwiseProduct(th);
    }
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        const double mean = sum(0, j) / draws;
        const double var = sq(0, j) / draws - mean * mean;
        const double se = std::sqrt(std::max(var, 0.0) / draws);
        CHECK(std::abs(mean - truth(0, j)) <= 4.0 * se + 1e-12);
    }
}

TEST_CASE("gramian oracles") {
    CHECK((gramian_tilde(Mat::Identity(3, 3)) - Mat::Identity(3, 3)).norm() == 0.0);
    Mat orth = Mat::Zero(3, 2);
    orth(0, 0) = 1;
    orth(1, 1) = 2;
    Mat expect(2, 2);
    expect << 1, 0, 0, 4;
    CHECK((gramian_tilde(orth) - expect).norm() < 1e-15);

    Mat a(10, 3);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = rng::normal(4, std::uint64_t(j), std::uint64_t(i));
    const Mat g = gramian_tilde(a);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            double acc = 0;
            for (int i = 0; i < 10; ++i) acc += a(i, j) * a(i, k);
            CHECK(g(j, k) == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("consistent gramian") {
    const auto b = enumerate_basis(1, 3);
    const Eigen::Index n = 200;
    Mat clean(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) clean(i, 0) = std::sin(0.05 * double(i)) + 0.3;
    const Mat theta_star = evaluate_library(b, clean);
    // Smoothed library held fixed; only the raw data is redrawn.
    Mat smooth = clean;
    smooth.array() += 0.01;
    const Mat theta_tilde = evaluate_library(b, smooth);

    SUBCASE("no noise gives the raw product") {
        CHECK((gramian_consistent(theta_tilde, clean, b, 0.0) - theta_tilde.transpose() * theta_star).norm() <
              1e-9);
    }
    SUBCASE("low-degree columns need no correction") {
        Mat noisy = clean;
        for (Eigen::Index i = 0; i < n; ++i) noisy(i, 0) += 0.5 * rng::normal(2, 0, std::uint64_t(i));
        const Mat h = gramian_consistent(theta_tilde, noisy, b, 0.5);
        const Mat raw = theta_tilde.transpose() * evaluate_library(b, noisy);
        CHECK((h.col(0) - raw.col(0)).norm() < 1e-9);
        CHECK((h.col(1) - raw.col(1)).norm() < 1e-9);
    }
    SUBCASE("monte carlo mean matches the clean product") {
        const double s = 0.5;
        const int draws = 2000;
        Mat sum = Mat::Zero(b.size(), b.size()), sq = sum;
        for (int r = 0; r < draws; ++r) {
            Mat noisy = clean;
            for (Eigen::Index i = 0; i < n; ++i) noisy(i, 0) += s * rng::normal(77, std::uint64_t(r), std::uint64_t(i));
            const Mat h = gramian_consistent(theta_tilde, noisy, b, s) / double(n);
            sum += h;
            sq += h.cwiseProduct(h);
        }
        const Mat exact = theta_tilde.transpose() * theta_star / double(n);
        for (Eigen::Index j = 0; j < b.size(); ++j)
            for (Eigen::Index k = 0; k < b.size(); ++k) {
                const double mean = sum(j, k) / draws;
                const double se = std::sqrt(std::max(sq(j, k) / draws - mean * mean, 0.0) / draws);
                CHECK(std::abs(mean - exact(j, k)) <= 3.5 * se + 1e-12);
            }
    }
}

TEST_CASE("integrated library prepends the constant column") {
    const auto b = enumerate_basis(1, 1);
    Mat u(5, 1);
    u << 0, 1, 2, 3, 4;
    const auto t = operators::build_trapezoid(5, 4.0);
    const Mat phi = integrated_library(evaluate_library(b, u), t);
    CHECK(phi.cols() == 3);
    CHECK(phi.col(0).isOnes());
    CHECK((phi.col(1) - Vec::LinSpaced(5, 0, 4)).norm() < 1e-14);
    Vec half(5);
    half << 0, 0.5, 2, 4.5, 8;
    CHECK((phi.col(2) - half).norm() < 1e-14);
}

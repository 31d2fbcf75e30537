#include <doctest.h>

#include <omp.h>

#include <cstring>

#include "odediscover/basis.hpp"
#include "odediscover/kernels.hpp"
#include "odediscover/operators.hpp"
#include "odediscover/rng.hpp"

using namespace odediscover;

namespace {

Mat states(Eigen::Index n, Eigen::Index m) {
    Mat x(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < m; ++k) x(i, k) = 2.0 * rng::normal(21, std::uint64_t(k), std::uint64_t(i));
    return x;
}

bool bitwise_equal(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::memcmp(a.data() + i, b.data() + i, sizeof(double)) != 0) return false;
    return true;
}

}  // namespace

TEST_CASE("monomial library: OpenMP matches the serial reference bit for bit") {
    for (auto [m, d] : {std::pair{1, 4}, {2, 4}, {3, 2}, {6, 3}}) {
        const auto b = basis::enumerate_basis(m, d);
        const kernels::Exponents exps(b.indices.begin(), b.indices.end());
        const Mat x = states(1201, m);
        for (int threads : {1, 2, 4}) {
            omp_set_num_threads(threads);
            CHECK(bitwise_equal(kernels::monomial_library_serial(exps, d, x), kernels::monomial_library_omp(exps, d, x)));
        }
    }
}

TEST_CASE("cumulative trapezoid: OpenMP matches the serial reference bit for bit") {
    const Mat x = states(999, 17);
    for (int threads : {1, 3}) {
        omp_set_num_threads(threads);
        CHECK(bitwise_equal(kernels::cumulative_trapezoid_serial(x, 0.013), kernels::cumulative_trapezoid_omp(x, 0.013)));
    }
    const auto t = operators::build_trapezoid(999, 0.013 * 998);
    CHECK((kernels::cumulative_trapezoid_serial(x, 0.013) - t.dense() * x).norm() < 1e-10);
}

TEST_CASE("kernels handle empty inputs") {
    const auto b = basis::enumerate_basis(2, 2);
    const kernels::Exponents exps(b.indices.begin(), b.indices.end());
    CHECK(kernels::monomial_library_omp(exps, 2, Mat(0, 2)).rows() == 0);
    CHECK(kernels::cumulative_trapezoid_omp(Mat(0, 3), 0.1).rows() == 0);
}

TEST_CASE("thread count honours the environment") {
    setenv("ODEDISCOVER_THREADS", "3", 1);
    CHECK(kernels::configured_threads() == 3);
    setenv("ODEDISCOVER_THREADS", "garbage", 1);
    CHECK(kernels::configured_threads() >= 1);
    unsetenv("ODEDISCOVER_THREADS");
}

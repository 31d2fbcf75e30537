#include "odediscover/kernels.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace odediscover::kernels {

namespace {

inline void library_row(const Exponents& exps, int max_degree, const Mat& states, Eigen::Index i,
                        double* pw, Mat& out) {
    const Eigen::Index m = states.cols();
    const int stride = max_degree + 1;
    for (Eigen::Index k = 0; k < m; ++k) {
        double* row = pw + k * stride;
        row[0] = 1.0;
        for (int e = 1; e <= max_degree; ++e) row[e] = row[e - 1] * states(i, k);
    }
    for (std::size_t j = 0; j < exps.size(); ++j) {
        double v = 1.0;
        for (Eigen::Index k = 0; k < m; ++k) v *= pw[k * stride + exps[j][k]];
        out(i, Eigen::Index(j)) = v;
    }
}

}  // namespace

Mat monomial_library_serial(const Exponents& exps, int max_degree, const Mat& states) {
    Mat out(states.rows(), Eigen::Index(exps.size()));
    std::vector<double> pw(std::size_t(states.cols()) * std::size_t(max_degree + 1));
    for (Eigen::Index i = 0; i < states.rows(); ++i) library_row(exps, max_degree, states, i, pw.data(), out);
    return out;
}

Mat monomial_library_omp(const Exponents& exps, int max_degree, const Mat& states) {
    Mat out(states.rows(), Eigen::Index(exps.size()));
    const std::size_t scratch = std::size_t(states.cols()) * std::size_t(max_degree + 1);
    const Eigen::Index n = states.rows();
#pragma omp parallel num_threads(configured_threads())
    {
        std::vector<double> pw(scratch);
#pragma omp for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) library_row(exps, max_degree, states, i, pw.data(), out);
    }
    return out;
}

namespace {

inline void integrate_column(const Mat& x, double h, Eigen::Index c, Mat& y) {
    y(0, c) = 0.0;
    for (Eigen::Index i = 1; i < x.rows(); ++i) y(i, c) = y(i - 1, c) + h * (x(i - 1, c) + x(i, c));
}

}  // namespace

Mat cumulative_trapezoid_serial(const Mat& x, double dt) {
    Mat y(x.rows(), x.cols());
    if (x.rows() == 0) return y;
    for (Eigen::Index c = 0; c < x.cols(); ++c) integrate_column(x, 0.5 * dt, c, y);
    return y;
}

Mat cumulative_trapezoid_omp(const Mat& x, double dt) {
    Mat y(x.rows(), x.cols());
    if (x.rows() == 0) return y;
    const Eigen::Index cols = x.cols();
#pragma omp parallel for schedule(static) num_threads(configured_threads())
    for (Eigen::Index c = 0; c < cols; ++c) integrate_column(x, 0.5 * dt, c, y);
    return y;
}

int configured_threads() {
    if (const char* env = std::getenv("ODEDISCOVER_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

}  // namespace odediscover::kernels

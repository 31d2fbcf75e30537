#include "odediscover/weakform.hpp"

#include <cmath>
#include <string>

#include "odediscover/errors.hpp"
#include "odediscover/regression.hpp"

namespace odediscover::weakform {

TestFunctionSet make_test_functions(Eigen::Index n, double t_end, std::optional<int> count,
                                    std::optional<double> radius_samples, int degree) {
    if (n < 3) throw InvalidDimension("test functions need n >= 3");
    if (!(t_end > 0.0)) throw InvalidArgument("test functions need t_end > 0");
    if (degree < 2) throw InvalidArgument("test function degree must be >= 2");
    TestFunctionSet set;
    set.degree = degree;
    set.radius_samples = radius_samples ? *radius_samples : std::floor(double(n) / 20.0);
    if (set.radius_samples < 2.0)
        throw InvalidArgument("test support narrower than 3 samples (radius " + std::to_string(set.radius_samples) +
                              ")");
    const double dt = t_end / double(n - 1);
    const double r = set.radius_samples * dt;
    if (2.0 * r > t_end) throw InvalidArgument("test function support exceeds the time window");
    const double lo = r, hi = t_end - r;
    int l = count ? *count : int(std::floor((hi - lo) / r + 1e-9)) + 1;
    if (l < 1) throw InvalidArgument("need at least one test function");
    // Default: neighbours one radius apart (half-overlapping supports), block centred in the window.
    if (count) {
        for (int i = 0; i < l; ++i)
            set.centers.push_back(l == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * double(i) / double(l - 1));
    } else {
        const double start = lo + 0.5 * ((hi - lo) - double(l - 1) * r);
        for (int i = 0; i < l; ++i) set.centers.push_back(start + double(i) * r);
    }
    return set;
}

double phi(const TestFunctionSet& tests, std::size_t l, double t, double dt) {
    const double r = tests.radius_samples * dt;
    const double s = (t - tests.centers.at(l)) / r;
    if (std::abs(s) >= 1.0) return 0.0;
    return std::pow(1.0 - s * s, tests.degree);
}

double phi_dot(const TestFunctionSet& tests, std::size_t l, double t, double dt) {
    const double r = tests.radius_samples * dt;
    const double s = (t - tests.centers.at(l)) / r;
    if (std::abs(s) >= 1.0) return 0.0;
    return -2.0 * double(tests.degree) * s * std::pow(1.0 - s * s, tests.degree - 1) / r;
}

WeakSystem assemble_weak_system(const Trajectory& data, const basis::MonomialBasis& basis,
                                const TestFunctionSet& tests) {
    validate_uniform_grid(data.times);
    if (data.m() != basis.m) throw InvalidDimension("weak form: trajectory width does not match basis");
    if (tests.count() == 0) throw InvalidArgument("weak form: empty test function set");
    if (tests.radius_samples < 2.0) throw InvalidArgument("test support narrower than 3 samples");
    const double dt = data.dt();
    const double t0 = data.times(0), t1 = data.times(data.n() - 1);
    const double r = tests.radius_samples * dt;
    for (double c : tests.centers)
        if (c - r < t0 - 1e-12 * (t1 - t0) || c + r > t1 + 1e-12 * (t1 - t0))
            throw InvalidArgument("test function support leaves the time window");

    const Mat theta = basis::evaluate_library(basis, data.values);
    const Eigen::Index L = Eigen::Index(tests.count());
    Mat phis(L, data.n()), dphis(L, data.n());
    for (Eigen::Index l = 0; l < L; ++l)
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            phis(l, i) = phi(tests, std::size_t(l), data.times(i), dt);
            dphis(l, i) = phi_dot(tests, std::size_t(l), data.times(i), dt);
        }
    WeakSystem ws;
    ws.b = -dt * (dphis * data.values);
    ws.h = dt * (phis * theta);
    return ws;
}

Mat wsindy_discover(const Trajectory& data, const basis::MonomialBasis& basis, const TestFunctionSet& tests,
                    const std::vector<double>& lambda_grid) {
    const WeakSystem ws = assemble_weak_system(data, basis, tests);
    Mat coef(basis.m, basis.size());
    for (int k = 0; k < basis.m; ++k)
        coef.row(k) = regression::mstls_select(ws.h, ws.b.col(k), lambda_grid).c.transpose();
    return coef;
}

}  // namespace odediscover::weakform

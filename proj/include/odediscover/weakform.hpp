#pragma once

#include <optional>
#include <vector>

#include "odediscover/basis.hpp"
#include "odediscover/types.hpp"

namespace odediscover::weakform {

/// Bumps phi(t) = (1 - s^2)^q, s = (t - t_c) / r, supported on [t_c - r, t_c + r].
struct TestFunctionSet {
    std::vector<double> centers;  // seconds
    double radius_samples = 0.0;  // half-width in samples
    int degree = 8;               // q

    std::size_t count() const { return centers.size(); }
};

/// Uniform centers with every support inside [0, t_end]. By default the
/// radius is n/20 samples and centers are one radius apart (50% overlap);
/// `count` overrides the number of test functions.
TestFunctionSet make_test_functions(Eigen::Index n, double t_end, std::optional<int> count = std::nullopt,
                                    std::optional<double> radius_samples = std::nullopt, int degree = 8);

double phi(const TestFunctionSet& tests, std::size_t l, double t, double dt);
double phi_dot(const TestFunctionSet& tests, std::size_t l, double t, double dt);

struct WeakSystem {
    Mat b;  // L x m, column k is b_k
    Mat h;  // L x p
};

/// b_{k,l} = -dt sum_i phi_l'(t_i) u_k(t_i),  H_l = dt sum_i phi_l(t_i) theta_i.
WeakSystem assemble_weak_system(const Trajectory& data, const basis::MonomialBasis& basis,
                                const TestFunctionSet& tests);

/// m x p coefficients from MSTLS over lambda_grid, one state at a time.
Mat wsindy_discover(const Trajectory& data, const basis::MonomialBasis& basis, const TestFunctionSet& tests,
                    const std::vector<double>& lambda_grid);

}  // namespace odediscover::weakform

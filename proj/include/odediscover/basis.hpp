#pragma once

#include <string>
#include <vector>

#include "odediscover/operators.hpp"
#include "odediscover/types.hpp"

namespace odediscover::basis {

using MultiIndex = std::vector<int>;

/// Monomials of total degree <= d in m variables, graded order; within a
/// degree, lexicographically descending. indices[0] is the constant term.
struct MonomialBasis {
    int m = 0;
    int d = 0;
    std::vector<MultiIndex> indices;

    Eigen::Index size() const { return Eigen::Index(indices.size()); }
    int position(const MultiIndex& alpha) const;  // -1 when absent
    std::string term_name(std::size_t j) const;    // e.g. "u1^2*u2"
};

MonomialBasis enumerate_basis(int m, int d);

/// a < b: componentwise a_i <= b_i with a != b.
bool strictly_below(const MultiIndex& a, const MultiIndex& b);

/// Product of binomial(b_i, a_i).
double multi_binomial(const MultiIndex& b, const MultiIndex& a);

/// E[eps^alpha] for independent zero-mean Gaussian components.
double gaussian_moment(const MultiIndex& alpha, double sigma);
double gaussian_moment(const MultiIndex& alpha, const Vec& sigma_per_state);

/// N x p library. `states` is N x m.
Mat evaluate_library(const MonomialBasis& basis, const Mat& states);
Mat evaluate_library(const MonomialBasis& basis, const Trajectory& states);

/// Noise-centered library whose expectation over the noise is the clean library.
Mat evaluate_unbiased_library(const MonomialBasis& basis, const Mat& noisy, const Vec& sigma_per_state);
Mat evaluate_unbiased_library(const MonomialBasis& basis, const Mat& noisy, double sigma);

Mat gramian_tilde(const Mat& theta_tilde);

/// N * H_hat, with H_hat the bias-corrected estimate of theta_tilde^T theta_true / N.
Mat gramian_consistent(const Mat& theta_tilde, const Mat& noisy, const MonomialBasis& basis,
                       const Vec& sigma_per_state);
Mat gramian_consistent(const Mat& theta_tilde, const Mat& noisy, const MonomialBasis& basis, double sigma);

/// [1 | T * theta].
Mat integrated_library(const Mat& theta, const operators::TrapezoidMatrix& trap);

struct LibraryMatrices {
    Mat theta;
    Mat theta_hat;  // empty unless centered
    Mat phi;        // built from theta_hat when centered, theta otherwise
    Vec sigma;
};

LibraryMatrices build_library(const MonomialBasis& basis, const Trajectory& states, const Vec& sigma_per_state,
                              bool centered);

}  // namespace odediscover::basis

#pragma once

#include <vector>

#include "odediscover/basis.hpp"
#include "odediscover/types.hpp"

namespace odediscover::denoise {

struct DenoiseConfig {
    double alpha = 0.1;
    bool check_diverg = false;
    Vec sigma_per_state;  // needed for check_diverg and for centering
    int max_iters = 10000;
    double conv_tol = 1e-8;
    bool use_centered_library = false;
};

struct DenoiseResult {
    Trajectory denoised;
    int iterations = 0;
    bool converged = false;
    std::vector<double> per_iter_change;
    std::vector<std::vector<int>> reverted_states;  // per iteration, states reset to the previous iterate
};

/// One projection of every state onto the column space of [1 | T theta(u)].
/// With use_centered the noise-centered library built with `sigma` is used.
Trajectory psdn(const Trajectory& noisy, const basis::MonomialBasis& basis, const Vec& sigma, bool use_centered);
Trajectory psdn(const Trajectory& noisy, const basis::MonomialBasis& basis, double sigma, bool use_centered);

/// Repeated partial projections u <- alpha P u + (1 - alpha) u, rebuilding
/// the library from the current estimate each sweep.
DenoiseResult iter_psdn(const Trajectory& noisy, const basis::MonomialBasis& basis, const DenoiseConfig& cfg);

/// The library projector used by both routines, exposed for diagnostics.
Mat project_states(const Mat& states, const Mat& phi);

}  // namespace odediscover::denoise

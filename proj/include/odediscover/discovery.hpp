#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odediscover/basis.hpp"
#include "odediscover/conic.hpp"
#include "odediscover/denoise.hpp"
#include "odediscover/types.hpp"

// End-to-end equation discovery: denoise, then recover coefficients with
// DSINDy (IRW-SOCP), l1-SINDy (Tikhonov + IRW-Lasso) or WSINDy-lite.
namespace odediscover::discovery {

enum class Method { dsindy, l1sindy, wsindy_lite };
enum class GammaMode { theory, pareto };

Method parse_method(const std::string& s);
GammaMode parse_gamma_mode(const std::string& s);
std::string to_string(Method m);
std::string to_string(GammaMode g);

struct DiscoveryOptions {
    Method method = Method::dsindy;
    GammaMode gamma_mode = GammaMode::theory;
    int irw_iters = 4;
    double eps_w = 1e-4;
    bool consistent_gramian = false;    // G from the bias-corrected recursion instead of theta^T theta
    std::optional<Vec> sigma;           // per-state noise std; estimated from the data when absent
    double alpha = 0.1;                 // IterPSDN partial-projection weight
    bool check_diverg = true;
    int denoise_max_iters = 10000;
    conic::Settings solver;
    int pareto_max_evals = 30;
    double tikhonov_lambda_min = 1e-12;
    double tikhonov_lambda_max = 1.0;
    double lasso_lambda_range = 1e-8;   // search [range, upper] * lambda_max
    double lasso_lambda_upper = 0.1;
    std::optional<int> wsindy_count;
    std::optional<double> wsindy_radius;
    int wsindy_degree = 8;
};

struct DiscoveryResult {
    Method method = Method::dsindy;
    Mat coefficients;  // m x p
    Mat derivatives;   // N x m; empty for wsindy-lite
    Vec u0;
    Vec sigma_used;
    Trajectory denoised;
    bool denoise_converged = true;
    int denoise_iterations = 0;
    std::vector<std::vector<double>> gamma_used;  // per state, per IRW iteration
    std::vector<bool> no_corner;                  // per state, when gamma came from a Pareto search
    std::vector<std::vector<conic::Status>> solver_status;
    int irw_iterations = 0;
};

DiscoveryResult discover(const Trajectory& noisy, const basis::MonomialBasis& basis, const DiscoveryOptions& opt);

}  // namespace odediscover::discovery

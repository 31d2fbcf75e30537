#include "odediscover/denoise.hpp"

#include <cmath>
#include <string>

#include "odediscover/errors.hpp"
#include "odediscover/operators.hpp"

namespace odediscover::denoise {

namespace {

void check_input(const Trajectory& noisy, const basis::MonomialBasis& basis) {
    if (noisy.kind != TrajectoryKind::noisy) throw InvalidArgument("denoising expects a noisy trajectory");
    if (noisy.m() != basis.m) throw InvalidDimension("trajectory width does not match basis");
    if (noisy.n() < basis.size() + 1)
        throw InvalidDimension("need N >= p+1 samples (N=" + std::to_string(noisy.n()) +
                               ", p=" + std::to_string(basis.size()) + ")");
    validate_uniform_grid(noisy.times);
}

Mat library_phi(const Mat& states, const basis::MonomialBasis& basis, const operators::TrapezoidMatrix& trap,
                const Vec* centering_sigma) {
    const Mat theta = centering_sigma ? basis::evaluate_unbiased_library(basis, states, *centering_sigma)
                                      : basis::evaluate_library(basis, states);
    return basis::integrated_library(theta, trap);
}

}  // namespace

Mat project_states(const Mat& states, const Mat& phi) {
    const operators::Projector proj(phi);
    if (proj.rank() == 0) throw Error("degenerate library: integrated library has rank 0");
    return proj.apply(states);
}

Trajectory psdn(const Trajectory& noisy, const basis::MonomialBasis& basis, const Vec& sigma, bool use_centered) {
    check_input(noisy, basis);
    const auto trap = operators::build_trapezoid(noisy.n(), noisy.t_end());
    const Mat phi = library_phi(noisy.values, basis, trap, use_centered ? &sigma : nullptr);
    Trajectory out = noisy;
    out.kind = TrajectoryKind::denoised;
    out.values = project_states(noisy.values, phi);
    return out;
}

Trajectory psdn(const Trajectory& noisy, const basis::MonomialBasis& basis, double sigma, bool use_centered) {
    return psdn(noisy, basis, Vec::Constant(basis.m, sigma), use_centered);
}

DenoiseResult iter_psdn(const Trajectory& noisy, const basis::MonomialBasis& basis, const DenoiseConfig& cfg) {
    check_input(noisy, basis);
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    if (cfg.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    const bool need_sigma = cfg.check_diverg || cfg.use_centered_library;
    if (need_sigma) {
        if (cfg.sigma_per_state.size() != basis.m)
            throw InvalidArgument("sigma_per_state needs one entry per state");
        if ((cfg.sigma_per_state.array() < 0.0).any()) throw InvalidArgument("sigma_per_state must be >= 0");
    }

    const Eigen::Index n = noisy.n(), m = noisy.m();
    const auto trap = operators::build_trapezoid(n, noisy.t_end());
    const double sqrt_n = std::sqrt(double(n));
    const Mat& u0 = noisy.values;
    Mat u = u0;

    DenoiseResult res;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const Mat phi = library_phi(u, basis, trap, cfg.use_centered_library ? &cfg.sigma_per_state : nullptr);
        const Mat pu = project_states(u, phi);
        Mat next = cfg.alpha * pu + (1.0 - cfg.alpha) * u;

        std::vector<int> reverted;
        if (cfg.check_diverg) {
            for (Eigen::Index k = 0; k < m; ++k) {
                if ((next.col(k) - u0.col(k)).norm() / sqrt_n > cfg.sigma_per_state(k)) {
                    next.col(k) = u.col(k);
                    reverted.push_back(int(k));
                }
            }
        }

        double change = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double base = u.col(k).norm();
            const double diff = (next.col(k) - u.col(k)).norm();
            // A state sitting at zero that stays at zero has not changed.
            const double rel = base > 0.0 ? diff / base : (diff > 0.0 ? INFINITY : 0.0);
            change = std::max(change, rel);
        }
        u = std::move(next);
        res.per_iter_change.push_back(change);
        res.reverted_states.push_back(std::move(reverted));
        res.iterations = it + 1;
        if (change < cfg.conv_tol) {
            res.converged = true;
            break;
        }
    }
    res.denoised = noisy;
    res.denoised.kind = TrajectoryKind::denoised;
    res.denoised.values = std::move(u);
    return res;
}

}  // namespace odediscover::denoise

#include "odediscover/discovery.hpp"

#include <omp.h>

#include <cmath>

#include "odediscover/errors.hpp"
#include "odediscover/kernels.hpp"
#include "odediscover/operators.hpp"
#include "odediscover/pareto.hpp"
#include "odediscover/regression.hpp"
#include "odediscover/systems.hpp"
#include "odediscover/weakform.hpp"

namespace odediscover::discovery {

Method parse_method(const std::string& s) {
    if (s == "dsindy") return Method::dsindy;
    if (s == "l1sindy") return Method::l1sindy;
    if (s == "wsindy-lite" || s == "wsindy_lite") return Method::wsindy_lite;
    throw ConfigError("unknown method '" + s + "' (valid: dsindy, l1sindy, wsindy-lite)");
}

GammaMode parse_gamma_mode(const std::string& s) {
    if (s == "theory") return GammaMode::theory;
    if (s == "pareto") return GammaMode::pareto;
    throw ConfigError("unknown gamma mode '" + s + "' (valid: theory, pareto)");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::dsindy: return "dsindy";
        case Method::l1sindy: return "l1sindy";
        case Method::wsindy_lite: return "wsindy-lite";
    }
    return "?";
}

std::string to_string(GammaMode g) { return g == GammaMode::theory ? "theory" : "pareto"; }

namespace {

struct StateOutcome {
    Vec c;
    Vec u_dot;
    double u0 = 0.0;
    std::vector<double> gammas;
    std::vector<conic::Status> status;
    bool no_corner = false;
};

StateOutcome dsindy_state(const Vec& u_tilde, const Mat& theta, const Mat& phi, const Mat& coef_map, double sigma,
                          double t_end, const DiscoveryOptions& opt) {
    const Eigen::Index n = u_tilde.size();
    const Eigen::Index p = theta.cols();
    const auto d = operators::build_difference_stack(n, t_end);
    const auto init = regression::initial_derivative_fit(theta, phi, u_tilde);
    const double C = regression::smoothing_radius(d, init.u_dot);
    const Vec target = operators::Projector(phi).apply(u_tilde);
    // A strictly positive radius keeps the data cone's interior nonempty.
    const double floor = 1e-12 * std::max(1.0, target.norm());
    const double gamma_exp = std::max(regression::gamma_theory(sigma, p), floor);

    StateOutcome out;
    double gamma = gamma_exp;
    if (opt.gamma_mode == GammaMode::pareto) {
        regression::ConeProgram prog;
        prog.objective_map = coef_map;
        prog.smooth_radius = C;
        prog.target = target;
        prog.t_end = t_end;
        prog.solver = opt.solver;
        auto eval = [&](double g) {
            prog.data_radius = g;
            const auto r = regression::solve_socp(prog);
            pareto::ParetoCurvePoint pt;
            pt.reg_residual = r.objective;
            pt.sol_residual = r.data_residual;
            return pt;
        };
        const auto sel = pareto::gamma_pareto(eval, gamma_exp, opt.pareto_max_evals);
        gamma = sel.gamma;
        out.no_corner = sel.no_corner;
    }
    const auto irw = regression::irw_socp(u_tilde, theta, phi, coef_map, {gamma}, C, opt.irw_iters, opt.eps_w,
                                          opt.solver);
    out.c = irw.coefficients;
    out.u_dot = irw.u_dot;
    out.u0 = irw.u0;
    out.gammas = irw.gamma_used;
    out.status = irw.status;
    return out;
}

StateOutcome l1sindy_state(const Vec& u_tilde, const Mat& theta, double t_end, const DiscoveryOptions& opt) {
    const Eigen::Index n = u_tilde.size();
    const Eigen::Index p = theta.cols();
    const auto trap = operators::build_trapezoid(n, t_end);
    const auto d = operators::build_difference_stack(n, t_end);
    // T integrates from zero, so the data are shifted to start at zero.
    const Vec shifted = (u_tilde.array() - u_tilde(0)).matrix();
    auto tik_eval = [&](double lam) {
        const Vec ud = regression::tikhonov_derivative(shifted, trap, d, lam);
        pareto::ParetoCurvePoint pt;
        pt.reg_residual = d.apply(ud).norm();
        pt.sol_residual = (trap.apply(ud) - shifted).norm();
        return pt;
    };
    const auto tik = pareto::corner_search(tik_eval, opt.tikhonov_lambda_min, opt.tikhonov_lambda_max,
                                           opt.pareto_max_evals);
    StateOutcome out;
    out.u_dot = regression::tikhonov_derivative(shifted, trap, d, tik.lambda_corner);
    out.u0 = u_tilde(0);
    out.gammas.push_back(tik.lambda_corner);

    // IRW-Lasso on unit-norm columns, lambda from a Pareto search each pass.
    Vec norms = theta.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < p; ++j)
        if (!(norms(j) > 0.0)) norms(j) = 1.0;
    const Mat a = theta * norms.cwiseInverse().asDiagonal();
    const Vec& b = out.u_dot;
    const Vec atb2 = 2.0 * (a.transpose() * b);
    Vec w = Vec::Ones(p);
    Vec cs = Vec::Zero(p);
    for (int it = 0; it < opt.irw_iters; ++it) {
        const double lam_max = atb2.cwiseAbs().cwiseQuotient(w).maxCoeff();
        if (!(lam_max > 0.0)) break;
        auto eval = [&](double lam) {
            const Vec c = regression::weighted_lasso(a, b, lam, w).c;
            pareto::ParetoCurvePoint pt;
            pt.reg_residual = w.cwiseProduct(c).lpNorm<1>();
            pt.sol_residual = (a * c - b).norm();
            return pt;
        };
        // At lam_max the solution is zero and log|c|_1 diverges, which would swamp the curve's scaling.
        const auto sel = pareto::corner_search(eval, opt.lasso_lambda_range * lam_max, opt.lasso_lambda_upper * lam_max,
                                               opt.pareto_max_evals);
        cs = regression::weighted_lasso(a, b, sel.lambda_corner, w).c;
        out.gammas.push_back(sel.lambda_corner);
        w = (cs.cwiseAbs().array() + opt.eps_w).inverse().matrix();
    }
    out.c = cs.cwiseQuotient(norms);
    return out;
}

}  // namespace

DiscoveryResult discover(const Trajectory& noisy, const basis::MonomialBasis& basis, const DiscoveryOptions& opt) {
    if (noisy.m() != basis.m) throw InvalidDimension("trajectory width does not match basis");
    validate_uniform_grid(noisy.times);
    const Eigen::Index n = noisy.n();
    const Eigen::Index m = noisy.m();
    const double t_end = noisy.t_end();

    DiscoveryResult res;
    res.method = opt.method;
    res.sigma_used = opt.sigma ? *opt.sigma : systems::estimate_noise_std(noisy);
    if (res.sigma_used.size() != m) throw InvalidDimension("sigma must have one entry per state");

    if (opt.method == Method::wsindy_lite) {
        const auto tests = weakform::make_test_functions(n, t_end, opt.wsindy_count, opt.wsindy_radius,
                                                         opt.wsindy_degree);
        res.coefficients = weakform::wsindy_discover(noisy, basis, tests, regression::default_mstls_grid());
        res.denoised = noisy;
        return res;
    }

    denoise::DenoiseConfig dcfg;
    dcfg.alpha = opt.alpha;
    dcfg.check_diverg = opt.check_diverg;
    dcfg.sigma_per_state = res.sigma_used;
    dcfg.max_iters = opt.denoise_max_iters;
    Trajectory in = noisy;
    in.kind = TrajectoryKind::noisy;
    const auto den = denoise::iter_psdn(in, basis, dcfg);
    res.denoised = den.denoised;
    res.denoise_converged = den.converged;
    res.denoise_iterations = den.iterations;

    const Mat& ut = den.denoised.values;
    const Mat theta = basis::evaluate_library(basis, ut);
    const Mat phi = basis::integrated_library(theta, operators::build_trapezoid(n, t_end));
    Mat coef_map;
    if (opt.method == Method::dsindy) {
        coef_map = opt.consistent_gramian
                       ? regression::coefficient_map(theta, basis::gramian_consistent(theta, noisy.values, basis,
                                                                                        res.sigma_used))
                       : regression::coefficient_map(theta);
    }

    std::vector<StateOutcome> states(static_cast<std::size_t>(m));
    std::vector<std::string> errors(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel()) num_threads(kernels::configured_threads())
    for (Eigen::Index k = 0; k < m; ++k) {
        try {
            states[std::size_t(k)] = opt.method == Method::dsindy
                                         ? dsindy_state(ut.col(k), theta, phi, coef_map, res.sigma_used(k), t_end, opt)
                                         : l1sindy_state(ut.col(k), theta, t_end, opt);
        } catch (const std::exception& e) {
            errors[std::size_t(k)] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw SolverError(e);

    res.coefficients.resize(m, basis.size());
    res.derivatives.resize(n, m);
    res.u0.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& s = states[std::size_t(k)];
        res.coefficients.row(k) = s.c.transpose();
        res.derivatives.col(k) = s.u_dot;
        res.u0(k) = s.u0;
        res.gamma_used.push_back(s.gammas);
        res.no_corner.push_back(s.no_corner);
        res.solver_status.push_back(s.status);
    }
    res.irw_iterations = opt.irw_iters;
    return res;
}

}  // namespace odediscover::discovery

#include "odediscover/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "odediscover/errors.hpp"

namespace odediscover::regression {

using operators::SpMat;

InitialDerivative initial_derivative_fit(const Mat& theta_tilde, const Mat& phi_tilde, const Vec& u_tilde) {
    if (phi_tilde.rows() != u_tilde.size() || theta_tilde.rows() != u_tilde.size())
        throw InvalidDimension("initial derivative: row mismatch");
    if (phi_tilde.cols() != theta_tilde.cols() + 1)
        throw InvalidDimension("initial derivative: phi must have one more column than theta");
    const operators::Pseudoinverse pinv(phi_tilde);
    if (pinv.rank() < phi_tilde.cols())
        throw Error("integrated library is rank deficient (rank " + std::to_string(pinv.rank()) + " of " +
                    std::to_string(phi_tilde.cols()) + "); reduce the library degree");
    const Vec beta = pinv.apply(u_tilde);
    InitialDerivative out;
    out.u0 = beta(0);
    out.u_dot = theta_tilde * beta.tail(beta.size() - 1);
    return out;
}

Vec initial_derivative(const Mat& theta_tilde, const Mat& phi_tilde, const Vec& u_tilde) {
    return initial_derivative_fit(theta_tilde, phi_tilde, u_tilde).u_dot;
}

double smoothing_radius(const operators::DifferenceStack& d, const Vec& u_dot_init) {
    return d.apply(u_dot_init).norm();
}

double gamma_theory(double sigma, Eigen::Index p) {
    if (sigma < 0.0) throw InvalidArgument("gamma: sigma must be >= 0");
    if (p < 1) throw InvalidArgument("gamma: p must be >= 1");
    return sigma * std::sqrt(double(p + 1));
}

namespace {

void finish_socp(const ConeProgram& prog, const operators::TrapezoidMatrix& trap,
                 const operators::DifferenceStack& d, SocpResult& res) {
    res.objective = (prog.objective_map * res.u_dot).lpNorm<1>();
    const Vec fit = (trap.apply(res.u_dot).array() + res.u0).matrix();
    res.data_residual = (fit - prog.target).norm();
    res.smooth_violation = std::max(0.0, d.apply(res.u_dot).norm() - prog.smooth_radius);
    res.data_violation = std::max(0.0, res.data_residual - prog.data_radius);
}

}  // namespace

SocpResult solve_socp(const ConeProgram& prog) {
    const Eigen::Index n = prog.target.size();
    const Eigen::Index p = prog.objective_map.rows();
    if (prog.objective_map.cols() != n) throw InvalidDimension("socp: objective map must have N columns");
    if (prog.smooth_radius < 0.0 || prog.data_radius < 0.0) throw InvalidArgument("socp: radii must be >= 0");
    if (n < 3) throw InvalidDimension("socp: need N >= 3");
    const auto trap = operators::build_trapezoid(n, prog.t_end);
    const auto d = operators::build_difference_stack(n, prog.t_end);

    SocpResult res;
    res.u_dot = Vec::Zero(n);
    // The origin (u0 = 0, u_dot = 0) is optimal whenever it is feasible:
    // the objective is nonnegative and vanishes there.
    if (prog.target.norm() <= prog.data_radius) {
        res.status = conic::Status::optimal;
        finish_socp(prog, trap, d, res);
        return res;
    }
    if (prog.smooth_radius == 0.0) {
        // Only u_dot = 0 is admissible; the best offset is the mean.
        res.u0 = prog.target.mean();
        res.status = conic::Status::optimal;
        finish_socp(prog, trap, d, res);
        if (res.data_violation > 0.0) res.status = conic::Status::numerical_error;
        return res;
    }

    // Variables x = (u0, v[N], w[p], t[p], r[N]) with w = M v and
    // r = u0 + T v - target written through S^{-1} r = u0 e1 + K v - S^{-1} target.
    const Eigen::Index iu0 = 0, iv = 1, iw = 1 + n, it = 1 + n + p, ir = 1 + n + 2 * p;
    const Eigen::Index nx = 1 + 2 * n + 2 * p;

    conic::Problem cp;
    cp.c = Vec::Zero(nx);
    cp.c.segment(it, p).setOnes();

    std::vector<Eigen::Triplet<double>> ta;
    ta.reserve(std::size_t(p * (n + 1) + 5 * n));
    for (Eigen::Index j = 0; j < p; ++j) {
        ta.emplace_back(j, iw + j, 1.0);
        for (Eigen::Index i = 0; i < n; ++i)
            if (prog.objective_map(j, i) != 0.0) ta.emplace_back(j, iv + i, -prog.objective_map(j, i));
    }
    const SpMat kmat = trap.increments();
    const SpMat bmat = trap.cumsum_inverse();
    for (int c = 0; c < bmat.outerSize(); ++c)
        for (SpMat::InnerIterator e(bmat, c); e; ++e) ta.emplace_back(p + e.row(), ir + e.col(), e.value());
    for (int c = 0; c < kmat.outerSize(); ++c)
        for (SpMat::InnerIterator e(kmat, c); e; ++e) ta.emplace_back(p + e.row(), iv + e.col(), -e.value());
    ta.emplace_back(p, iu0, -1.0);
    cp.A.resize(p + n, nx);
    cp.A.setFromTriplets(ta.begin(), ta.end());
    cp.b = Vec::Zero(p + n);
    cp.b.tail(n) = -(bmat * prog.target);

    const Eigen::Index m1 = 3 * n - 3;
    const Eigen::Index rows = 2 * p + (1 + m1) + (1 + n);
    std::vector<Eigen::Triplet<double>> tg;
    tg.reserve(std::size_t(4 * p + 6 * n + n));
    for (Eigen::Index j = 0; j < p; ++j) {
        tg.emplace_back(j, iw + j, 1.0);
        tg.emplace_back(j, it + j, -1.0);
        tg.emplace_back(p + j, iw + j, -1.0);
        tg.emplace_back(p + j, it + j, -1.0);
    }
    const SpMat dmat = d.sparse();
    const Eigen::Index o1 = 2 * p + 1;
    for (int c = 0; c < dmat.outerSize(); ++c)
        for (SpMat::InnerIterator e(dmat, c); e; ++e) tg.emplace_back(o1 + e.row(), iv + e.col(), -e.value());
    const Eigen::Index o2 = 2 * p + 1 + m1 + 1;
    for (Eigen::Index i = 0; i < n; ++i) tg.emplace_back(o2 + i, ir + i, -1.0);
    cp.G.resize(rows, nx);
    cp.G.setFromTriplets(tg.begin(), tg.end());
    cp.h = Vec::Zero(rows);
    cp.h(2 * p) = prog.smooth_radius;
    cp.h(o2 - 1) = prog.data_radius;
    cp.dims.nonneg = 2 * p;
    cp.dims.soc = {1 + m1, 1 + n};

    const conic::Solution sol = conic::solve(cp, prog.solver);
    res.status = sol.status;
    res.iterations = sol.iterations;
    res.dual_bound = sol.dual_objective;
    if (sol.x.size() == nx) {
        res.u0 = sol.x(iu0);
        res.u_dot = sol.x.segment(iv, n);
    }
    finish_socp(prog, trap, d, res);
    return res;
}

Mat coefficient_map(const Mat& theta_tilde, const std::optional<Mat>& gram) {
    if (!gram) return operators::Pseudoinverse(theta_tilde).dense();
    if (gram->rows() != theta_tilde.cols() || gram->cols() != theta_tilde.cols())
        throw InvalidDimension("coefficient map: Gramian must be p x p");
    return operators::Pseudoinverse(*gram).apply(Mat(theta_tilde.transpose()));
}

Vec irw_weights(const Vec& c, double eps_w, bool* fell_back) {
    const double cmax = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    if (fell_back) *fell_back = false;
    if (!(cmax > 0.0)) {
        if (fell_back) *fell_back = true;
        return Vec::Ones(c.size());
    }
    return (c.cwiseAbs().array() + eps_w * cmax).inverse().matrix();
}

IrwSocpResult irw_socp(const Vec& u_tilde, const Mat& theta_tilde, const Mat& phi_tilde, const Mat& coef_map,
                       const std::vector<double>& gamma_schedule, double C, int irw_iters, double eps_w,
                       const conic::Settings& solver) {
    if (irw_iters < 1) throw InvalidArgument("irw_iters must be >= 1");
    if (gamma_schedule.empty()) throw InvalidArgument("gamma schedule is empty");
    const Eigen::Index n = u_tilde.size();
    if (coef_map.cols() != n || coef_map.rows() != theta_tilde.cols())
        throw InvalidDimension("coefficient map must be p x N");
    if (n < 2) throw InvalidDimension("need at least two samples");

    IrwSocpResult out;
    ConeProgram prog;
    prog.target = operators::Projector(phi_tilde).apply(u_tilde);
    prog.smooth_radius = C;
    prog.solver = solver;
    // The time span is encoded in the integrated library: column 1 is T*1
    // because the first basis function is the constant.
    prog.t_end = phi_tilde(n - 1, 1);
    if (!(prog.t_end > 0.0)) throw InvalidArgument("phi_tilde does not carry a positive time span");

    Vec w = Vec::Ones(theta_tilde.cols());
    for (int i = 0; i < irw_iters; ++i) {
        prog.objective_map = w.asDiagonal() * coef_map;
        prog.data_radius = gamma_schedule[std::min<std::size_t>(std::size_t(i), gamma_schedule.size() - 1)];
        const SocpResult r = solve_socp(prog);
        const Vec c = coef_map * r.u_dot;
        out.coefficient_trail.push_back(c);
        out.gamma_used.push_back(prog.data_radius);
        out.status.push_back(r.status);
        out.coefficients = c;
        out.u_dot = r.u_dot;
        out.u0 = r.u0;
        out.irw_iterations = i + 1;
        bool fb = false;
        w = irw_weights(c, eps_w, &fb);
        out.weight_fallback.push_back(fb);
    }
    return out;
}

Vec tikhonov_derivative(const Vec& u, const operators::TrapezoidMatrix& trap, const operators::DifferenceStack& d,
                        double lambda) {
    const Eigen::Index n = u.size();
    if (trap.n() != n || d.n() != n) throw InvalidDimension("tikhonov: operator size mismatch");
    if (lambda < 0.0) throw InvalidArgument("tikhonov: lambda must be >= 0");
    if (lambda == 0.0) return operators::Pseudoinverse(trap.dense()).apply(u);

    // Unknowns (u_dot, r, mu): r = T u_dot - u imposed as S^{-1} r - K u_dot = -S^{-1} u,
    // stationarity 2 lambda D^T D u_dot - K^T mu = 0 and 2 r + S^{-T} mu = 0.
    const SpMat k = trap.increments();
    const SpMat b = trap.cumsum_inverse();
    const SpMat dd = d.sparse();
    const SpMat dtd = SpMat(dd.transpose() * dd) * (2.0 * lambda);
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](const SpMat& m, Eigen::Index ro, Eigen::Index co, double s) {
        for (int c = 0; c < m.outerSize(); ++c)
            for (SpMat::InnerIterator e(m, c); e; ++e) trip.emplace_back(ro + e.row(), co + e.col(), s * e.value());
    };
    add(dtd, 0, 0, 1.0);
    add(SpMat(k.transpose()), 0, 2 * n, -1.0);
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(n + i, n + i, 2.0);
    add(SpMat(b.transpose()), n, 2 * n, 1.0);
    add(k, 2 * n, 0, -1.0);
    add(b, 2 * n, n, 1.0);
    SpMat kkt(3 * n, 3 * n);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt.makeCompressed();
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(kkt);
    if (lu.info() != Eigen::Success) throw SolverError("tikhonov: KKT factorization failed");
    Vec rhs = Vec::Zero(3 * n);
    rhs.tail(n) = -(b * u);
    Vec x = lu.solve(rhs);
    for (int it = 0; it < 2; ++it) x += lu.solve(Vec(rhs - kkt * x));
    return x.head(n);
}

LassoResult weighted_lasso(const Mat& a, const Vec& b, double lambda, const Vec& weights, double gap_tol,
                           int max_sweeps) {
    const Eigen::Index p = a.cols();
    if (a.rows() != b.size()) throw InvalidDimension("lasso: row mismatch");
    if (weights.size() != p) throw InvalidDimension("lasso: one weight per column");
    if (lambda < 0.0) throw InvalidArgument("lasso: lambda must be >= 0");
    if (!a.allFinite() || !b.allFinite()) throw InvalidArgument("lasso: non-finite input");

    LassoResult res;
    if (lambda == 0.0) {
        res.c = operators::Pseudoinverse(a).apply(b);
        return res;
    }
    // Gram-form coordinate descent; each update costs O(p).
    const Mat g = a.transpose() * a;
    const Vec atb = a.transpose() * b;
    const double bb = b.squaredNorm();
    Vec c = Vec::Zero(p);
    Vec gc = Vec::Zero(p);  // G c
    const double scale = std::max(bb, 1e-300);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (g(j, j) <= 0.0) continue;
            const double old = c(j);
            const double rho = atb(j) - gc(j) + g(j, j) * old;
            const double thr = 0.5 * lambda * weights(j);
            const double nv = rho > thr ? (rho - thr) / g(j, j) : (rho < -thr ? (rho + thr) / g(j, j) : 0.0);
            if (nv != old) {
                gc += g.col(j) * (nv - old);
                c(j) = nv;
            }
        }
        // Duality gap with nu = 2 s r, s chosen so |A_j^T nu| <= lambda w_j.
        const Vec atr = atb - gc;
        const double rr = std::max(0.0, bb - 2.0 * c.dot(atb) + c.dot(gc));
        double s = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double v = std::abs(2.0 * atr(j));
            if (v > 0.0) s = std::min(s, lambda * weights(j) / v);
        }
        const double primal = rr + lambda * weights.cwiseProduct(c).lpNorm<1>();
        // nu^T b - |nu|^2 / 4 with r^T b = bb - c^T A^T b.
        const double rb = bb - c.dot(atb);
        const double dual = 2.0 * s * rb - s * s * rr;
        res.gap = primal - dual;
        res.sweeps = sweep;
        if (res.gap <= gap_tol * scale) break;
    }
    res.c = c;
    return res;
}

Vec irw_lasso(const Mat& a, const Vec& b, double lambda, int irw_iters, double eps_w) {
    if (irw_iters < 1) throw InvalidArgument("irw_iters must be >= 1");
    Vec w = Vec::Ones(a.cols());
    Vec c;
    for (int i = 0; i < irw_iters; ++i) {
        c = weighted_lasso(a, b, lambda, w).c;
        w = (c.cwiseAbs().array() + eps_w).inverse().matrix();
    }
    return c;
}

namespace {

Vec stls_bounds(const Mat& a, const Vec& b, const Vec& lower, const Vec& upper, int max_iters) {
    const Eigen::Index p = a.cols();
    std::vector<bool> active(std::size_t(p), true);
    Vec c = Vec::Zero(p);
    for (int it = 0; it < max_iters; ++it) {
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < p; ++j)
            if (active[std::size_t(j)]) cols.push_back(j);
        if (cols.empty()) return Vec::Zero(p);
        Mat sub(a.rows(), Eigen::Index(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) sub.col(Eigen::Index(k)) = a.col(cols[k]);
        const Vec cs = operators::Pseudoinverse(sub).apply(b);
        c.setZero();
        bool changed = false;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const Eigen::Index j = cols[k];
            const double v = cs(Eigen::Index(k));
            if (std::abs(v) < lower(j) || std::abs(v) > upper(j)) {
                active[std::size_t(j)] = false;
                changed = true;
            } else {
                c(j) = v;
            }
        }
        if (!changed) return c;
    }
    return c;
}

}  // namespace

Vec stls(const Mat& a, const Vec& b, double threshold, std::optional<double> upper_bound, int max_iters) {
    if (threshold < 0.0) throw InvalidArgument("stls: threshold must be >= 0");
    if (a.rows() != b.size()) throw InvalidDimension("stls: row mismatch");
    const Vec lower = Vec::Constant(a.cols(), threshold);
    const Vec upper = Vec::Constant(a.cols(), upper_bound ? *upper_bound : std::numeric_limits<double>::infinity());
    return stls_bounds(a, b, lower, upper, max_iters);
}

std::vector<double> default_mstls_grid() {
    std::vector<double> g;
    for (int i = 0; i < 50; ++i) g.push_back(std::pow(10.0, -4.0 + 4.0 * double(i) / 49.0));
    return g;
}

MstlsSelection mstls_select(const Mat& h, const Vec& b, const std::vector<double>& lambda_grid) {
    if (h.rows() != b.size()) throw InvalidDimension("mstls: row mismatch");
    if (lambda_grid.empty()) throw InvalidArgument("mstls: empty lambda grid");
    const Eigen::Index p = h.cols();
    const Vec cls = operators::Pseudoinverse(h).apply(b);
    const double denom = (h * cls).norm();
    const double bn = b.norm();
    Vec ratio(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double hn = h.col(j).norm();
        ratio(j) = hn > 0.0 ? bn / hn : 0.0;
    }
    MstlsSelection best;
    best.loss = std::numeric_limits<double>::infinity();
    for (double lam : lambda_grid) {
        if (!(lam > 0.0)) throw InvalidArgument("mstls: lambda values must be positive");
        const Vec lower = (lam * ratio.array().max(1.0)).matrix();
        const Vec upper = (ratio.array().min(1.0) / lam).matrix();
        const Vec c = stls_bounds(h, b, lower, upper, 100);
        const double fit = denom > 0.0 ? (h * (c - cls)).norm() / denom : 0.0;
        const double loss = fit + double((c.array() != 0.0).count()) / double(p);
        best.losses.push_back(loss);
        if (loss < best.loss) {
            best.loss = loss;
            best.lambda = lam;
            best.c = c;
        }
    }
    return best;
}

}  // namespace odediscover::regression

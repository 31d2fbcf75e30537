#include "odediscover/systems.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "odediscover/csv.hpp"
#include "odediscover/errors.hpp"
#include "odediscover/rng.hpp"

namespace odediscover::systems {

namespace {

void set_term(OdeSystem& sys, int state, const basis::MultiIndex& alpha, double value) {
    const int j = sys.basis.position(alpha);
    if (j < 0) throw Error("internal: term missing from declared basis of " + sys.name);
    sys.true_coefficients(state, j) = value;
}

OdeSystem make_shell(const std::string& name, int m, int d, double t_end, Vec ic) {
    OdeSystem s;
    s.name = name;
    s.m = m;
    s.basis = basis::enumerate_basis(m, d);
    s.true_coefficients = Mat::Zero(m, s.basis.size());
    s.default_ic = std::move(ic);
    s.default_t_end = t_end;
    s.default_degree = d;
    return s;
}

OdeSystem duffing(const std::string& name, double kappa, double gamma, double eps) {
    OdeSystem s = make_shell(name, 2, 4, 10.0, Vec{{0.0, 1.0}});
    s.rhs = [=](const Vec& u) {
        return Vec{{u(1), -kappa * u(0) - gamma * u(1) - eps * u(0) * u(0) * u(0)}};
    };
    set_term(s, 0, {0, 1}, 1.0);
    set_term(s, 1, {1, 0}, -kappa);
    set_term(s, 1, {0, 1}, -gamma);
    set_term(s, 1, {3, 0}, -eps);
    return s;
}

OdeSystem van_der_pol() {
    const double g = 2.0;
    OdeSystem s = make_shell("van_der_pol", 2, 4, 10.0, Vec{{0.0, 1.0}});
    s.rhs = [=](const Vec& u) { return Vec{{u(1), -u(0) + g * u(1) - g * u(0) * u(0) * u(1)}}; };
    set_term(s, 0, {0, 1}, 1.0);
    set_term(s, 1, {1, 0}, -1.0);
    set_term(s, 1, {0, 1}, g);
    set_term(s, 1, {2, 1}, -g);
    return s;
}

OdeSystem rossler() {
    const double a = 0.2, b = 0.2, k = 5.7;
    OdeSystem s = make_shell("rossler", 3, 2, 10.0, Vec{{0.0, -5.0, 0.0}});
    s.rhs = [=](const Vec& u) { return Vec{{-u(1) - u(2), u(0) + a * u(1), b + u(2) * (u(0) - k)}}; };
    set_term(s, 0, {0, 1, 0}, -1.0);
    set_term(s, 0, {0, 0, 1}, -1.0);
    set_term(s, 1, {1, 0, 0}, 1.0);
    set_term(s, 1, {0, 1, 0}, a);
    set_term(s, 2, {0, 0, 0}, b);
    set_term(s, 2, {1, 0, 1}, 1.0);
    set_term(s, 2, {0, 0, 1}, -k);
    return s;
}

OdeSystem lorenz96() {
    const int m = 6;
    const double f = 8.0;
    Vec ic = Vec::Constant(m, 8.0);
    ic(0) = 1.0;
    OdeSystem s = make_shell("lorenz96", m, 3, 5.0, ic);
    auto wrap = [m](int i) { return ((i % m) + m) % m; };
    s.rhs = [=](const Vec& u) {
        Vec du(m);
        for (int i = 0; i < m; ++i) du(i) = (u(wrap(i + 1)) - u(wrap(i - 2))) * u(wrap(i - 1)) - u(i) + f;
        return du;
    };
    for (int i = 0; i < m; ++i) {
        basis::MultiIndex a(m, 0), b(m, 0), lin(m, 0), one(m, 0);
        a[wrap(i + 1)] += 1;
        a[wrap(i - 1)] += 1;
        b[wrap(i - 2)] += 1;
        b[wrap(i - 1)] += 1;
        lin[i] = 1;
        set_term(s, i, a, 1.0);
        set_term(s, i, b, -1.0);
        set_term(s, i, lin, -1.0);
        set_term(s, i, one, f);
    }
    return s;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"duffing_ps1", "duffing_ps2", "van_der_pol", "rossler", "lorenz96"}; }

OdeSystem builtin_system(const std::string& name) {
    if (name == "duffing_ps1") return duffing(name, 1.0, 0.1, 5.0);
    if (name == "duffing_ps2") return duffing(name, 0.2, 0.2, 1.0);
    if (name == "van_der_pol") return van_der_pol();
    if (name == "rossler") return rossler();
    if (name == "lorenz96") return lorenz96();
    std::string valid;
    for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown system '" + name + "' (valid: " + valid + ")");
}

OdeSystem polynomial_system(const std::string& name, const basis::MonomialBasis& basis, const Mat& coefficients) {
    if (coefficients.rows() != basis.m || coefficients.cols() != basis.size())
        throw InvalidDimension("polynomial system: coefficients must be m x p");
    OdeSystem s;
    s.name = name;
    s.m = basis.m;
    s.basis = basis;
    s.true_coefficients = coefficients;
    s.default_degree = basis.d;
    s.default_ic = Vec::Zero(basis.m);
    // Sparse terms only: keeps learned-model simulation cheap.
    struct Term {
        int j;
        std::vector<std::pair<int, double>> coef;
    };
    std::vector<Term> terms;
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
        Term t{int(j), {}};
        for (int k = 0; k < basis.m; ++k)
            if (coefficients(k, j) != 0.0) t.coef.emplace_back(k, coefficients(k, j));
        if (!t.coef.empty()) terms.push_back(std::move(t));
    }
    const auto idx = basis.indices;
    const int m = basis.m;
    s.rhs = [terms, idx, m](const Vec& u) {
        Vec du = Vec::Zero(m);
        for (const Term& t : terms) {
            double v = 1.0;
            for (int k = 0; k < m; ++k)
                for (int e = 0; e < idx[t.j][k]; ++e) v *= u(k);
            for (const auto& [k, c] : t.coef) du(k) += c * v;
        }
        return du;
    };
    return s;
}

Trajectory simulate_until_blowup(const OdeSystem& system, const Vec& ic, double t_end, Eigen::Index n,
                                 double max_step_fraction, bool* diverged) {
    if (n < 2) throw InvalidDimension("simulate needs n >= 2");
    if (!(t_end > 0.0)) throw InvalidArgument("simulate needs t_end > 0");
    if (ic.size() != system.m) throw InvalidDimension("initial condition length must equal m");
    if (!(max_step_fraction > 0.0)) throw InvalidArgument("step fraction must be positive");
    if (diverged) *diverged = false;
    Trajectory out;
    out.kind = TrajectoryKind::truth;
    out.times = uniform_grid(n, t_end);
    out.values.resize(n, system.m);
    const double dt_out = t_end / double(n - 1);
    const double cap = max_step_fraction * t_end;
    const long substeps = std::max(1L, long(std::ceil(dt_out / cap - 1e-12)));
    const double h = dt_out / double(substeps);

    Vec u = ic;
    out.values.row(0) = u.transpose();
    for (Eigen::Index i = 1; i < n; ++i) {
        for (long s = 0; s < substeps; ++s) {
            const Vec k1 = system.rhs(u);
            const Vec k2 = system.rhs(u + 0.5 * h * k1);
            const Vec k3 = system.rhs(u + 0.5 * h * k2);
            const Vec k4 = system.rhs(u + h * k3);
            u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!u.allFinite()) {
            if (diverged) *diverged = true;
            out.times.conservativeResize(i);
            out.values.conservativeResize(i, Eigen::NoChange);
            return out;
        }
        out.values.row(i) = u.transpose();
    }
    return out;
}

Trajectory simulate(const OdeSystem& system, const Vec& ic, double t_end, Eigen::Index n, double max_step_fraction) {
    bool diverged = false;
    Trajectory out = simulate_until_blowup(system, ic, t_end, n, max_step_fraction, &diverged);
    if (diverged) {
        const double t = t_end * double(out.n()) / double(n - 1);
        std::ostringstream os;
        os << system.name << ": non-finite state by t=" << t;
        throw DivergenceError(os.str(), t);
    }
    return out;
}

Trajectory add_noise(const Trajectory& truth, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw InvalidArgument("noise std must be nonnegative");
    if (truth.kind != TrajectoryKind::truth) throw InvalidArgument("add_noise expects a clean trajectory");
    Trajectory out = truth;
    out.kind = TrajectoryKind::noisy;
    if (sigma == 0.0) return out;
    for (Eigen::Index k = 0; k < out.m(); ++k)
        for (Eigen::Index i = 0; i < out.n(); ++i)
            out.values(i, k) += sigma * rng::normal(seed, std::uint64_t(k), std::uint64_t(i));
    return out;
}

Vec estimate_noise_std(const Trajectory& noisy) {
    const Eigen::Index n = noisy.n();
    if (n < 3) throw InvalidDimension("noise estimate needs N >= 3");
    Vec s(noisy.m());
    for (Eigen::Index k = 0; k < noisy.m(); ++k) {
        const auto u = noisy.values.col(k);
        const Vec d2 = u.tail(n - 2) - 2.0 * u.segment(1, n - 2) + u.head(n - 2);
        s(k) = std::sqrt(d2.squaredNorm() / (6.0 * double(n - 2)));
    }
    return s;
}

Mat evaluate_rhs(const OdeSystem& system, const Mat& states) {
    if (states.cols() != system.m) throw InvalidDimension("rhs: state width mismatch");
    Mat out(states.rows(), states.cols());
    for (Eigen::Index i = 0; i < states.rows(); ++i) out.row(i) = system.rhs(states.row(i).transpose()).transpose();
    return out;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::vector<std::string> header{"t"};
    for (Eigen::Index k = 0; k < traj.m(); ++k) header.push_back("u" + std::to_string(k + 1));
    Mat table(traj.n(), traj.m() + 1);
    table.col(0) = traj.times;
    table.rightCols(traj.m()) = traj.values;
    csv::write_matrix(path, header, table);
}

Trajectory read_trajectory_csv(const std::string& path) {
    auto [header, table] = csv::read_matrix(path);
    if (header.empty() || header[0] != "t") throw IoError(path + ": expected header starting with 't'");
    for (std::size_t k = 1; k < header.size(); ++k)
        if (header[k] != "u" + std::to_string(k)) throw IoError(path + ": unexpected column '" + header[k] + "'");
    Trajectory out;
    out.kind = TrajectoryKind::noisy;
    out.times = table.col(0);
    out.values = table.rightCols(table.cols() - 1);
    validate_uniform_grid(out.times);
    return out;
}

}  // namespace odediscover::systems

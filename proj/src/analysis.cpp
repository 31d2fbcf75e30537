#include "odediscover/analysis.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "odediscover/csv.hpp"
#include "odediscover/denoise.hpp"
#include "odediscover/errors.hpp"
#include "odediscover/kernels.hpp"
#include "odediscover/operators.hpp"
#include "odediscover/rng.hpp"

namespace odediscover::analysis {

double relative_error(const Vec& est, const Vec& truth) {
    if (est.size() != truth.size()) throw InvalidDimension("relative error: length mismatch");
    const double tn = truth.norm();
    if (!(tn > 0.0)) throw InvalidArgument("relative error: truth has zero norm");
    return (est - truth).norm() / tn;
}

namespace {

constexpr double kHorizonThreshold = 0.1;

Eigen::Index steps_for(double span, double dt) { return Eigen::Index(std::llround(span / dt)) + 1; }

}  // namespace

Reconstruction reconstruction_error(const Mat& learned, const systems::OdeSystem& truth, Protocol protocol,
                                    std::optional<double> t_end_opt, double dt) {
    if (!learned.allFinite()) throw InvalidArgument("reconstruction: learned coefficients must be finite");
    if (!(dt > 0.0)) throw InvalidArgument("reconstruction: dt must be positive");
    const double t_end = t_end_opt ? *t_end_opt : truth.default_t_end;
    const auto model = systems::polynomial_system(truth.name + "_learned", truth.basis, learned);
    const Eigen::Index m = truth.m;
    Reconstruction rec;

    if (protocol == Protocol::double_time) {
        const double span = 2.0 * t_end;
        const Eigen::Index n = steps_for(span, dt);
        rec.window = span;
        const Trajectory ref = systems::simulate(truth, truth.default_ic, span, n);
        bool diverged = false;
        const Trajectory est = systems::simulate_until_blowup(model, truth.default_ic, span, n, 1e-3, &diverged);
        rec.rel_err = Vec::Ones(m);
        if (diverged) {
            rec.failed = true;
            return rec;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
            const double e = relative_error(est.values.col(k), ref.values.col(k));
            rec.rel_err(k) = std::isfinite(e) ? std::min(e, 1.0) : 1.0;
            if (!(e <= 1.0)) rec.failed = true;
        }
        if (rec.failed) rec.rel_err.setOnes();
        return rec;
    }

    // Horizon: both models restart from the true state at t_end.
    const Trajectory train = systems::simulate(truth, truth.default_ic, t_end, steps_for(t_end, dt));
    const Vec start = train.values.row(train.n() - 1).transpose();
    const double window = t_end;
    const Eigen::Index n = steps_for(window, dt);
    rec.window = window;
    const Trajectory ref = systems::simulate(truth, start, window, n);
    bool diverged = false;
    const Trajectory est = systems::simulate_until_blowup(model, start, window, n, 1e-3, &diverged);
    Vec num = Vec::Zero(m), den = Vec::Zero(m);
    rec.rel_err = Vec::Zero(m);
    double horizon = 0.0;
    bool broke = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i >= est.n()) {
            broke = true;
            break;
        }
        bool ok = true;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double diff = est.values(i, k) - ref.values(i, k);
            num(k) += diff * diff;
            den(k) += ref.values(i, k) * ref.values(i, k);
            const double e = den(k) > 0.0 ? std::sqrt(num(k) / den(k)) : (num(k) > 0.0 ? INFINITY : 0.0);
            rec.rel_err(k) = e;
            if (!(e < kHorizonThreshold)) ok = false;
        }
        if (!ok) {
            broke = true;
            break;
        }
        horizon = ref.times(i);
    }
    rec.horizon = broke ? horizon : window;
    rec.failed = diverged;
    return rec;
}

Vec max_third_derivative(const systems::OdeSystem& system, double t_end, Eigen::Index n_dense) {
    if (n_dense < 7) throw InvalidDimension("dense grid too small");
    const Trajectory tr = systems::simulate(system, system.default_ic, t_end, n_dense);
    const Mat f = systems::evaluate_rhs(system, tr.values);
    const double h = tr.dt();
    Vec mx = Vec::Zero(system.m);
    // u''' = d^2/dt^2 F(u(t)); the vector field is exact, so no noise is amplified.
    for (Eigen::Index i = 2; i + 2 < f.rows(); ++i) {
        const auto d2 = (-f.row(i + 2) + 16.0 * f.row(i + 1) - 30.0 * f.row(i) + 16.0 * f.row(i - 1) - f.row(i - 2)) /
                        (12.0 * h * h);
        mx = mx.cwiseMax(d2.cwiseAbs().transpose());
    }
    return mx;
}

TheoryEstimates theory_estimates(const systems::OdeSystem& system, Eigen::Index n, double sigma,
                                 const basis::MonomialBasis& basis, std::optional<double> t_end_opt,
                                 Eigen::Index n_dense) {
    if (sigma < 0.0) throw InvalidArgument("theory: sigma must be >= 0");
    const double t_end = t_end_opt ? *t_end_opt : system.default_t_end;
    const Trajectory tr = systems::simulate(system, system.default_ic, t_end, n);
    TheoryEstimates te;
    const Vec norms = tr.values.colwise().norm().transpose();
    const double p1 = double(basis.size() + 1);
    te.e_theory = (sigma * std::sqrt(p1)) * norms.cwiseInverse();
    te.e_noisy = (sigma * std::sqrt(double(n))) * norms.cwiseInverse();
    te.c1 = (t_end * t_end * t_end / 12.0) * max_third_derivative(system, t_end, n_dense);
    te.gamma_exp = sigma * std::sqrt(p1);
    return te;
}

std::vector<Record> ExperimentRecord::flatten() const {
    std::vector<Record> out;
    auto push = [&](int state, const std::string& metric, double v) {
        out.push_back({system, method, n, sigma, seed, state, metric, v});
    };
    auto per_state = [&](const Vec& v, const std::string& metric) {
        for (Eigen::Index k = 0; k < v.size(); ++k) push(int(k) + 1, metric, v(k));
    };
    per_state(denoise_rel_err, "denoise_rel_err");
    per_state(deriv_rel_err, "deriv_rel_err");
    per_state(coeff_rel_err, "coeff_rel_err");
    per_state(recon_rel_err, "recon_rel_err");
    push(0, "failed", failed ? 1.0 : 0.0);
    push(0, "pipeline_error", error.empty() ? 0.0 : 1.0);
    if (prediction_horizon) push(0, "prediction_horizon", *prediction_horizon);
    return out;
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t grid_index, int replication) {
    return rng::derive_key(base_seed, std::uint64_t(grid_index), std::uint64_t(replication));
}

namespace {

int resolve_threads(int requested) { return requested > 0 ? requested : kernels::configured_threads(); }

ExperimentRecord run_one(const systems::OdeSystem& sys, const Trajectory& truth, const Mat& true_rhs,
                         discovery::Method method, Eigen::Index n, double sigma, std::uint64_t seed,
                         const Study& study) {
    ExperimentRecord rec;
    rec.system = sys.name;
    rec.method = discovery::to_string(method);
    rec.n = n;
    rec.sigma = sigma;
    rec.seed = seed;
    const Eigen::Index m = sys.m;
    const Protocol protocol = sys.name == "lorenz96" ? Protocol::horizon : Protocol::double_time;
    try {
        const Trajectory noisy = systems::add_noise(truth, sigma, seed);
        discovery::DiscoveryOptions opt = study.options;
        opt.method = method;
        const auto res = discovery::discover(noisy, sys.basis, opt);
        rec.coefficients = res.coefficients;
        rec.denoise_rel_err.resize(m);
        rec.coeff_rel_err.resize(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            rec.denoise_rel_err(k) = relative_error(res.denoised.values.col(k), truth.values.col(k));
            rec.coeff_rel_err(k) =
                relative_error(res.coefficients.row(k).transpose(), sys.true_coefficients.row(k).transpose());
        }
        if (res.derivatives.size()) {
            rec.deriv_rel_err.resize(m);
            for (Eigen::Index k = 0; k < m; ++k)
                rec.deriv_rel_err(k) = relative_error(res.derivatives.col(k), true_rhs.col(k));
        }
        if (study.reconstruct) {
            const auto r = reconstruction_error(res.coefficients, sys, protocol, study.t_end);
            if (protocol == Protocol::horizon) {
                rec.prediction_horizon = r.horizon;
                rec.failed = r.failed;
            } else {
                rec.recon_rel_err = r.rel_err;
                rec.failed = r.failed;
            }
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.failed = true;
        if (study.reconstruct && protocol == Protocol::double_time) rec.recon_rel_err = Vec::Ones(m);
    }
    return rec;
}

}  // namespace

std::vector<ExperimentRecord> monte_carlo(const Study& study) {
    if (study.replications < 1) throw InvalidArgument("replications must be >= 1");
    if (study.n_list.empty() || study.sigma_list.empty() || study.methods.empty())
        throw InvalidArgument("study needs at least one N, one sigma and one method");
    const auto sys = systems::builtin_system(study.system);
    const double t_end = study.t_end ? *study.t_end : sys.default_t_end;

    std::vector<Trajectory> truths;
    std::vector<Mat> rhs;
    for (auto n : study.n_list) {
        truths.push_back(systems::simulate(sys, sys.default_ic, t_end, n));
        rhs.push_back(systems::evaluate_rhs(sys, truths.back().values));
    }
    const std::size_t ns = study.sigma_list.size();
    const std::size_t grid = study.n_list.size() * ns;
    const std::size_t reps = std::size_t(study.replications);
    const std::size_t nm = study.methods.size();
    const long tasks = long(grid * reps * nm);
    std::vector<ExperimentRecord> out(static_cast<std::size_t>(tasks));

#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(study.threads))
    for (long t = 0; t < tasks; ++t) {
        const std::size_t mi = std::size_t(t) % nm;
        const std::size_t r = (std::size_t(t) / nm) % reps;
        const std::size_t g = std::size_t(t) / (nm * reps);
        const std::size_t in = g / ns, is = g % ns;
        const std::uint64_t seed = replication_seed(study.base_seed, g, int(r));
        out[std::size_t(t)] = run_one(sys, truths[in], rhs[in], study.methods[mi], study.n_list[in],
                                      study.sigma_list[is], seed, study);
    }
    return out;
}

std::vector<Record> verify_theory(const TheoryStudy& study) {
    if (study.replications < 1) throw InvalidArgument("replications must be >= 1");
    if (study.sigma < 0.0) throw InvalidArgument("sigma must be >= 0");
    const auto sys = systems::builtin_system(study.system);
    const double t_end = study.t_end ? *study.t_end : sys.default_t_end;
    const auto& basis = sys.basis;
    const Eigen::Index m = sys.m;

    std::vector<std::vector<Record>> slots(study.n_list.size() * std::size_t(study.replications));
    for (std::size_t g = 0; g < study.n_list.size(); ++g) {
        const Eigen::Index n = study.n_list[g];
        const Trajectory truth = systems::simulate(sys, sys.default_ic, t_end, n);
        const Mat phi_star = basis::integrated_library(basis::evaluate_library(basis, truth.values),
                                                       operators::build_trapezoid(n, t_end));
        const operators::Projector p_star(phi_star);
        const Vec norms = truth.values.colwise().norm().transpose();
        denoise::DenoiseConfig cfg;
        cfg.alpha = study.alpha;
        cfg.check_diverg = study.check_diverg;
        cfg.sigma_per_state = Vec::Constant(m, study.sigma);

#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(study.threads))
        for (int r = 0; r < study.replications; ++r) {
            const std::uint64_t seed = replication_seed(study.base_seed, g, r);
            const Trajectory noisy = systems::add_noise(truth, study.sigma, seed);
            std::vector<Record> recs;
            auto emit = [&](const std::string& method, const Mat& est) {
                for (Eigen::Index k = 0; k < m; ++k) {
                    const double e2 = (est.col(k) - truth.values.col(k)).squaredNorm();
                    recs.push_back({sys.name, method, n, study.sigma, seed, int(k) + 1, "sq_err", e2});
                    recs.push_back({sys.name, method, n, study.sigma, seed, int(k) + 1, "rel_err",
                                    std::sqrt(e2) / norms(k)});
                }
            };
            emit("known_phi", p_star.apply(noisy.values));
            emit("psdn", denoise::psdn(noisy, basis, study.sigma, study.psdn_centered).values);
            emit("iterpsdn", denoise::iter_psdn(noisy, basis, cfg).denoised.values);
            slots[g * std::size_t(study.replications) + std::size_t(r)] = std::move(recs);
        }
    }
    std::vector<Record> out;
    for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::vector<Record> flatten(const std::vector<ExperimentRecord>& recs) {
    std::vector<Record> out;
    for (const auto& r : recs) {
        auto f = r.flatten();
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

namespace {

auto key_of(const Record& r) { return std::tie(r.system, r.method, r.n, r.sigma, r.seed, r.state, r.metric); }

}  // namespace

void sort_records(std::vector<Record>& recs) {
    std::stable_sort(recs.begin(), recs.end(), [](const Record& a, const Record& b) { return key_of(a) < key_of(b); });
}

void write_records_csv(const std::string& path, std::vector<Record> recs) {
    sort_records(recs);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(recs.size());
    for (const auto& r : recs)
        rows.push_back({r.system, r.method, std::to_string(r.n), csv::format_double(r.sigma), std::to_string(r.seed),
                        std::to_string(r.state), r.metric, csv::format_double(r.value)});
    csv::write_rows(path, {"system", "method", "N", "sigma", "seed", "state", "metric", "value"}, rows);
}

std::vector<SummaryRow> summarize(const std::vector<Record>& recs) {
    using GroupKey = std::tuple<std::string, std::string, Eigen::Index, double, int, std::string>;
    using PointKey = std::tuple<std::string, std::string, Eigen::Index, double>;
    std::map<GroupKey, std::vector<double>> groups;
    std::map<PointKey, std::pair<double, double>> failures;  // (failed count, replications)
    for (const auto& r : recs) {
        if (r.metric == "failed") {
            auto& f = failures[{r.system, r.method, r.n, r.sigma}];
            f.first += r.value;
            f.second += 1.0;
        }
        groups[{r.system, r.method, r.n, r.sigma, r.state, r.metric}].push_back(r.value);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, vals] : groups) {
        SummaryRow row;
        std::tie(row.system, row.method, row.n, row.sigma, row.state, row.metric) = key;
        double sum = 0.0;
        std::size_t cnt = 0;
        for (double v : vals)
            if (std::isfinite(v)) {
                sum += v;
                ++cnt;
            }
        row.count = cnt;
        row.mean = cnt ? sum / double(cnt) : std::nan("");
        double ss = 0.0;
        for (double v : vals)
            if (std::isfinite(v)) ss += (v - row.mean) * (v - row.mean);
        row.std = cnt > 1 ? std::sqrt(ss / double(cnt - 1)) : 0.0;
        row.sem = cnt > 0 ? row.std / std::sqrt(double(cnt)) : 0.0;
        const auto it = failures.find({row.system, row.method, row.n, row.sigma});
        row.failure_rate = it != failures.end() && it->second.second > 0 ? it->second.first / it->second.second : 0.0;
        out.push_back(row);
    }
    return out;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({r.system, r.method, std::to_string(r.n), csv::format_double(r.sigma), std::to_string(r.state),
                         r.metric, csv::format_double(r.mean), csv::format_double(r.std), csv::format_double(r.sem),
                         std::to_string(r.count), csv::format_double(r.failure_rate)});
    csv::write_rows(path,
                    {"system", "method", "N", "sigma", "state", "metric", "mean", "std", "sem", "count", "failure_rate"},
                    cells);
}

}  // namespace odediscover::analysis

#include "odediscover/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "odediscover/analysis.hpp"
#include "odediscover/config.hpp"
#include "odediscover/csv.hpp"
#include "odediscover/denoise.hpp"
#include "odediscover/discovery.hpp"
#include "odediscover/errors.hpp"
#include "odediscover/svg.hpp"
#include "odediscover/systems.hpp"

#ifndef ODEDISCOVER_VERSION
#define ODEDISCOVER_VERSION "0.0.0"
#endif

namespace odediscover::cli {

namespace fs = std::filesystem;

std::string version() { return ODEDISCOVER_VERSION; }

namespace {

std::string flag_for(const std::string& key) {
    std::string f = key;
    for (auto& c : f)
        if (c == '_') c = '-';
    return "--" + f;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

void prepare_output(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

discovery::DiscoveryOptions discovery_options(const config::RunConfig& cfg) {
    discovery::DiscoveryOptions opt;
    opt.gamma_mode = cfg.gamma_mode;
    opt.irw_iters = cfg.irw_iters;
    opt.alpha = cfg.alpha;
    opt.consistent_gramian = cfg.consistent_gramian;
    return opt;
}

Eigen::Index the_n(const config::RunConfig& cfg) { return cfg.n_list.front(); }

double the_t_end(const config::RunConfig& cfg, const systems::OdeSystem& sys) {
    return cfg.t_end ? *cfg.t_end : sys.default_t_end;
}

// Mean over states of each (method, N, sigma) summary entry for one metric.
struct PlotPoint {
    std::string method;
    Eigen::Index n;
    double sigma;
    double value;
};

std::vector<PlotPoint> state_averaged(const std::vector<analysis::SummaryRow>& rows, const std::string& metric) {
    std::map<std::tuple<std::string, Eigen::Index, double>, std::pair<double, int>> acc;
    for (const auto& r : rows)
        if (r.metric == metric && r.state > 0 && std::isfinite(r.mean)) {
            auto& a = acc[{r.method, r.n, r.sigma}];
            a.first += r.mean;
            a.second += 1;
        }
    std::vector<PlotPoint> out;
    for (const auto& [k, a] : acc) out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), a.first / a.second});
    return out;
}

svg::Chart chart(std::string title, std::string x_label, std::string y_label, bool log_axes) {
    svg::Chart ch;
    ch.title = std::move(title);
    ch.x_label = std::move(x_label);
    ch.y_label = std::move(y_label);
    ch.log_x = ch.log_y = log_axes;
    return ch;
}

svg::Series series(std::string name) {
    svg::Series s;
    s.name = std::move(name);
    return s;
}

std::string sigma_tag(double s) {
    std::string t = csv::format_double(s);
    for (auto& c : t)
        if (c == '.') c = 'p';
    return t;
}

void plot_error_curves(const fs::path& dir, const std::vector<analysis::SummaryRow>& rows,
                       const std::vector<std::string>& metrics, const config::RunConfig& cfg) {
    for (const auto& metric : metrics) {
        const auto pts = state_averaged(rows, metric);
        if (pts.empty()) continue;
        if (cfg.n_list.size() > 1) {
            for (double s : cfg.sigma_list) {
                svg::Chart ch = chart(metric + " vs N (sigma = " + csv::format_double(s) + ")", "N", metric, true);
                std::map<std::string, svg::Series> by_method;
                for (const auto& p : pts)
                    if (p.sigma == s) {
                        auto& se = by_method[p.method];
                        se.name = p.method;
                        se.x.push_back(double(p.n));
                        se.y.push_back(p.value);
                    }
                for (auto& [m, se] : by_method) ch.series.push_back(se);
                svg::write_chart(dir / (metric + "_vs_N_sigma" + sigma_tag(s) + ".svg"), ch);
            }
        }
        if (cfg.sigma_list.size() > 1) {
            for (auto n : cfg.n_list) {
                svg::Chart ch = chart(metric + " vs sigma (N = " + std::to_string(n) + ")", "sigma", metric, true);
                std::map<std::string, svg::Series> by_method;
                for (const auto& p : pts)
                    if (p.n == n) {
                        auto& se = by_method[p.method];
                        se.name = p.method;
                        se.x.push_back(p.sigma);
                        se.y.push_back(p.value);
                    }
                for (auto& [m, se] : by_method) ch.series.push_back(se);
                svg::write_chart(dir / (metric + "_vs_sigma_N" + std::to_string(n) + ".svg"), ch);
            }
        }
    }
}

void write_coefficients(const fs::path& path, const basis::MonomialBasis& basis, const Mat& coef) {
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index k = 0; k < coef.rows(); ++k)
        for (Eigen::Index j = 0; j < coef.cols(); ++j)
            rows.push_back({std::to_string(k + 1), basis.term_name(std::size_t(j)), csv::format_double(coef(k, j))});
    csv::write_rows(path.string(), {"state", "term", "value"}, rows);
}

void write_derivatives(const fs::path& path, const Trajectory& like, const Mat& deriv) {
    Mat table(deriv.rows(), deriv.cols() + 1);
    table.col(0) = like.times;
    table.rightCols(deriv.cols()) = deriv;
    std::vector<std::string> header{"t"};
    for (Eigen::Index k = 0; k < deriv.cols(); ++k) header.push_back("du" + std::to_string(k + 1));
    csv::write_matrix(path.string(), header, table);
}

void plot_state(const fs::path& path, const std::vector<std::pair<std::string, const Trajectory*>>& trajs, int k) {
    svg::Chart ch = chart("state u" + std::to_string(k + 1), "t", "u" + std::to_string(k + 1), false);
    for (const auto& [name, tr] : trajs) {
        svg::Series s = series(name);
        s.x.assign(tr->times.data(), tr->times.data() + tr->n());
        const Vec col = tr->values.col(k);
        s.y.assign(col.data(), col.data() + col.size());
        ch.series.push_back(std::move(s));
    }
    svg::write_chart(path, ch);
}

void cmd_simulate(const config::RunConfig& cfg, const fs::path& dir) {
    const auto sys = systems::builtin_system(cfg.system);
    const auto truth = systems::simulate(sys, sys.default_ic, the_t_end(cfg, sys), the_n(cfg));
    const double sigma = cfg.sigma_list.front();
    std::optional<Trajectory> noisy;
    if (sigma > 0.0) noisy = systems::add_noise(truth, sigma, cfg.seed);
    systems::write_trajectory_csv((dir / "trajectory.csv").string(), truth);
    if (noisy) systems::write_trajectory_csv((dir / "noisy.csv").string(), *noisy);
    if (cfg.plots) {
        std::vector<std::pair<std::string, const Trajectory*>> tr;
        if (noisy) tr.push_back({"noisy", &*noisy});
        tr.push_back({"truth", &truth});
        plot_state(dir / "trajectory_u1.svg", tr, 0);
    }
}

void cmd_denoise(const config::RunConfig& cfg, const fs::path& dir) {
    const auto sys = systems::builtin_system(cfg.system);
    std::optional<Trajectory> truth;
    Trajectory noisy;
    if (!cfg.input.empty()) {
        noisy = systems::read_trajectory_csv(cfg.input);
        if (noisy.m() != sys.m) throw InvalidDimension("input has the wrong number of states for " + cfg.system);
    } else {
        truth = systems::simulate(sys, sys.default_ic, the_t_end(cfg, sys), the_n(cfg));
        noisy = systems::add_noise(*truth, cfg.sigma_list.front(), cfg.seed);
    }
    const Vec sigma = cfg.input.empty() ? Vec::Constant(sys.m, cfg.sigma_list.front())
                                        : systems::estimate_noise_std(noisy);
    Trajectory den;
    if (cfg.denoiser == "psdn") {
        den = denoise::psdn(noisy, sys.basis, sigma, false);
    } else {
        denoise::DenoiseConfig dc;
        dc.alpha = cfg.alpha;
        dc.check_diverg = true;
        dc.sigma_per_state = sigma;
        den = denoise::iter_psdn(noisy, sys.basis, dc).denoised;
    }

    if (truth) {
        std::vector<analysis::Record> recs;
        for (Eigen::Index k = 0; k < sys.m; ++k) {
            const double e = analysis::relative_error(den.values.col(k), truth->values.col(k));
            recs.push_back({sys.name, cfg.denoiser, noisy.n(), cfg.sigma_list.front(), cfg.seed, int(k) + 1,
                            "denoise_rel_err", e});
        }
        analysis::write_records_csv((dir / "records.csv").string(), recs);
        analysis::write_summary_csv((dir / "summary.csv").string(), analysis::summarize(recs));
        systems::write_trajectory_csv((dir / "truth.csv").string(), *truth);
    }
    systems::write_trajectory_csv((dir / "noisy.csv").string(), noisy);
    systems::write_trajectory_csv((dir / "denoised.csv").string(), den);
    if (cfg.plots) {
        std::vector<std::pair<std::string, const Trajectory*>> tr{{"noisy", &noisy}, {"denoised", &den}};
        if (truth) tr.push_back({"truth", &*truth});
        plot_state(dir / "denoised_u1.svg", tr, 0);
    }
}

void write_study_outputs(const fs::path& dir, const config::RunConfig& cfg, const basis::MonomialBasis& basis,
                         const std::vector<analysis::ExperimentRecord>& exps) {
    const auto recs = analysis::flatten(exps);
    analysis::write_records_csv((dir / "records.csv").string(), recs);
    const auto summary = analysis::summarize(recs);
    analysis::write_summary_csv((dir / "summary.csv").string(), summary);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::vector<std::string>> errors;
    for (const auto& e : exps) {
        for (Eigen::Index k = 0; k < e.coefficients.rows(); ++k)
            for (Eigen::Index j = 0; j < e.coefficients.cols(); ++j)
                rows.push_back({e.system, e.method, std::to_string(e.n), csv::format_double(e.sigma),
                                std::to_string(e.seed), std::to_string(k + 1), basis.term_name(std::size_t(j)),
                                csv::format_double(e.coefficients(k, j))});
        if (!e.error.empty())
            errors.push_back({e.method, std::to_string(e.n), csv::format_double(e.sigma), std::to_string(e.seed),
                              "\"" + e.error + "\""});
    }
    csv::write_rows((dir / "coefficients.csv").string(),
                    {"system", "method", "N", "sigma", "seed", "state", "term", "value"}, rows);
    if (!errors.empty())
        csv::write_rows((dir / "errors.csv").string(), {"method", "N", "sigma", "seed", "message"}, errors);
    if (cfg.plots)
        plot_error_curves(dir, summary, {"coeff_rel_err", "deriv_rel_err", "denoise_rel_err", "recon_rel_err"}, cfg);
}

analysis::Study make_study(const config::RunConfig& cfg) {
    analysis::Study st;
    st.system = cfg.system;
    st.n_list = cfg.n_list;
    st.sigma_list = cfg.sigma_list;
    st.methods = cfg.methods;
    st.replications = cfg.replications;
    st.base_seed = cfg.seed;
    st.t_end = cfg.t_end;
    st.options = discovery_options(cfg);
    st.reconstruct = cfg.reconstruct;
    return st;
}

void cmd_discover(const config::RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const auto sys = systems::builtin_system(cfg.system);
    if (!cfg.input.empty()) {
        const Trajectory noisy = systems::read_trajectory_csv(cfg.input);
        if (noisy.m() != sys.m) throw InvalidDimension("input has the wrong number of states for " + cfg.system);
        auto opt = discovery_options(cfg);
        opt.method = cfg.methods.front();
        const auto res = discovery::discover(noisy, sys.basis, opt);
        write_coefficients(dir / "coefficients.csv", sys.basis, res.coefficients);
        systems::write_trajectory_csv((dir / "denoised.csv").string(), res.denoised);
        if (res.derivatives.size()) write_derivatives(dir / "derivatives.csv", noisy, res.derivatives);
        for (Eigen::Index k = 0; k < sys.m; ++k) {
            out << "du" << k + 1 << "/dt =";
            bool any = false;
            for (Eigen::Index j = 0; j < res.coefficients.cols(); ++j)
                if (res.coefficients(k, j) != 0.0) {
                    out << ' ' << csv::format_double(res.coefficients(k, j)) << '*' << sys.basis.term_name(std::size_t(j));
                    any = true;
                }
            out << (any ? "\n" : " 0\n");
        }
        return;
    }
    const auto exps = analysis::monte_carlo(make_study(cfg));
    write_study_outputs(dir, cfg, sys.basis, exps);
    for (const auto& n : cfg.n_list)
        systems::write_trajectory_csv((dir / ("truth_N" + std::to_string(n) + ".csv")).string(),
                                      systems::simulate(sys, sys.default_ic, the_t_end(cfg, sys), n));
}

void cmd_benchmark(const config::RunConfig& cfg, const fs::path& dir) {
    const auto sys = systems::builtin_system(cfg.system);
    write_study_outputs(dir, cfg, sys.basis, analysis::monte_carlo(make_study(cfg)));
}

void cmd_verify_theory(const config::RunConfig& cfg, const fs::path& dir) {
    const auto sys = systems::builtin_system(cfg.system);
    analysis::TheoryStudy st;
    st.system = cfg.system;
    st.n_list = cfg.n_list;
    st.sigma = cfg.sigma_list.front();
    st.replications = cfg.replications;
    st.base_seed = cfg.seed;
    st.t_end = cfg.t_end;
    st.alpha = cfg.alpha;
    auto recs = analysis::verify_theory(st);
    analysis::write_records_csv((dir / "records.csv").string(), recs);
    const auto summary = analysis::summarize(recs);
    analysis::write_summary_csv((dir / "summary.csv").string(), summary);

    const double t_end = the_t_end(cfg, sys);
    const double p1 = double(sys.basis.size() + 1);
    const Vec c1 = analysis::max_third_derivative(sys, t_end) * (t_end * t_end * t_end / 12.0);
    std::vector<std::vector<std::string>> rows;
    std::map<Eigen::Index, Vec> e_theory;
    for (auto n : cfg.n_list) {
        const auto te = analysis::theory_estimates(sys, n, st.sigma, sys.basis, cfg.t_end);
        e_theory[n] = te.e_theory;
        for (Eigen::Index k = 0; k < sys.m; ++k) {
            const double lower = st.sigma * st.sigma * p1;
            const double upper = lower + c1(k) * c1(k) / std::pow(double(n - 1), 3);
            rows.push_back({std::to_string(n), std::to_string(k + 1), csv::format_double(te.e_theory(k)),
                            csv::format_double(te.e_noisy(k)), csv::format_double(c1(k)), csv::format_double(lower),
                            csv::format_double(upper)});
        }
    }
    csv::write_rows((dir / "theory.csv").string(),
                    {"N", "state", "e_theory", "e_noisy", "c1", "sq_err_lower", "sq_err_upper"}, rows);

    if (cfg.plots) {
        for (Eigen::Index k = 0; k < sys.m; ++k) {
            svg::Chart ch = chart("relative denoise error, state " + std::to_string(k + 1), "N", "relative error", true);
            std::map<std::string, svg::Series> by_method;
            for (const auto& r : summary)
                if (r.metric == "rel_err" && r.state == int(k) + 1) {
                    auto& s = by_method[r.method];
                    s.name = r.method;
                    s.x.push_back(double(r.n));
                    s.y.push_back(r.mean);
                }
            svg::Series th = series("sigma sqrt(p+1)/|u|");
            for (const auto& [n, e] : e_theory) {
                th.x.push_back(double(n));
                th.y.push_back(e(k));
            }
            for (auto& [m, s] : by_method) ch.series.push_back(s);
            ch.series.push_back(th);
            svg::write_chart(dir / ("theory_u" + std::to_string(k + 1) + ".svg"), ch);
        }
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse ODE discovery from noisy trajectories", "odediscover"};
    app.set_version_flag("--version", version());
    std::string command, config_path;
    app.add_option("command", command, "simulate | denoise | discover | verify-theory | benchmark");
    app.add_option("--config", config_path, "key = value file; flags override its entries");
    std::map<std::string, std::string> flags;
    for (const auto& key : config::known_keys()) {
        if (key == "command") continue;
        app.add_option_function<std::string>(
            flag_for(key), [&flags, key](const std::string& v) { flags[key] = v; }, "overrides '" + key + "'");
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << version() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "odediscover: " << e.what() << "\n";
        return kExitConfig;
    }

    config::RunConfig cfg;
    try {
        config::KeyValues kv;
        if (!config_path.empty()) kv = config::parse_file(config_path);
        for (const auto& [k, v] : flags) kv[k] = v;
        if (!command.empty()) kv["command"] = command;
        cfg = config::resolve(kv);
    } catch (const IoError& e) {
        err << "odediscover: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "odediscover: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const fs::path dir(cfg.output_dir);
        prepare_output(dir);
        switch (cfg.command) {
            case config::Command::simulate: cmd_simulate(cfg, dir); break;
            case config::Command::denoise: cmd_denoise(cfg, dir); break;
            case config::Command::discover: cmd_discover(cfg, dir, out); break;
            case config::Command::verify_theory: cmd_verify_theory(cfg, dir); break;
            case config::Command::benchmark: cmd_benchmark(cfg, dir); break;
        }
        write_text(dir / "manifest", config::render_manifest(cfg, version()));
    } catch (const IoError& e) {
        err << "odediscover: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "odediscover: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace odediscover::cli

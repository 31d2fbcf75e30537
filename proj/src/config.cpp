#include "odediscover/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "odediscover/csv.hpp"
#include "odediscover/errors.hpp"
#include "odediscover/systems.hpp"

namespace odediscover::config {

Command parse_command(const std::string& s) {
    if (s == "simulate") return Command::simulate;
    if (s == "denoise") return Command::denoise;
    if (s == "discover") return Command::discover;
    if (s == "verify-theory") return Command::verify_theory;
    if (s == "benchmark") return Command::benchmark;
    throw ConfigError("unknown command '" + s + "' (valid: simulate, denoise, discover, verify-theory, benchmark)");
}

std::string to_string(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::denoise: return "denoise";
        case Command::discover: return "discover";
        case Command::verify_theory: return "verify-theory";
        case Command::benchmark: return "benchmark";
    }
    return "?";
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "command", "system",         "N",     "t_end",     "sigma",              "sigma2",
        "seed",    "method",         "gamma_mode", "replications", "output_dir", "input",
        "denoiser", "alpha",         "irw_iters",  "consistent_gramian", "reconstruct", "plots"};
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_known(const std::string& key) {
    const auto& k = known_keys();
    return std::find(k.begin(), k.end(), key) != k.end();
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    }
}

long long to_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
        const unsigned long long x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> list_of(const std::string& key, const std::string& v) {
    std::vector<std::string> out;
    for (const auto& part : csv::split(v, ',')) {
        const auto t = trim(part);
        if (t.empty()) throw ConfigError(key + ": empty list entry in '" + v + "'");
        out.push_back(t);
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

template <class T>
std::string join(const std::vector<T>& xs, auto&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
    return out;
}

}  // namespace

KeyValues parse_text(const std::string& text, const std::string& origin) {
    KeyValues kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!is_known(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (kv.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

KeyValues parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

RunConfig resolve(const KeyValues& kv) {
    for (const auto& [k, v] : kv)
        if (!is_known(k)) throw ConfigError("unknown key '" + k + "'");
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        const auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    RunConfig cfg;
    const auto cmd = get("command");
    if (!cmd) throw ConfigError("no command given");
    cfg.command = parse_command(*cmd);

    const auto sys_name = get("system");
    if (!sys_name || sys_name->empty()) throw ConfigError("system is required");
    const auto names = systems::builtin_names();
    if (std::find(names.begin(), names.end(), *sys_name) == names.end()) {
        std::string valid;
        for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("unknown system '" + *sys_name + "' (valid: " + valid + ")");
    }
    cfg.system = *sys_name;
    const auto sys = systems::builtin_system(cfg.system);
    const bool mc = cfg.command == Command::verify_theory || cfg.command == Command::benchmark;

    if (const auto v = get("N")) {
        for (const auto& s : list_of("N", *v)) {
            const long long n = to_integer("N", s);
            if (n < sys.basis.size() + 2)
                throw ConfigError("N must be at least p + 2 = " + std::to_string(sys.basis.size() + 2) + " for " +
                                  cfg.system);
            cfg.n_list.push_back(Eigen::Index(n));
        }
    } else if (cfg.command == Command::verify_theory) {
        cfg.n_list = {250, 1000, 4000};
    } else if (cfg.command == Command::benchmark) {
        cfg.n_list = {250, 500, 1000, 2000};
    } else {
        cfg.n_list = {1000};
    }
    if (!mc && cfg.command != Command::discover && cfg.n_list.size() != 1)
        throw ConfigError(to_string(cfg.command) + " takes a single N");

    if (const auto v = get("t_end")) {
        cfg.t_end = to_double("t_end", *v);
        if (!(*cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
    }

    const auto sig = get("sigma"), sig2 = get("sigma2");
    if (sig && sig2) throw ConfigError("give sigma or sigma2, not both");
    if (sig) {
        for (const auto& s : list_of("sigma", *sig)) cfg.sigma_list.push_back(to_double("sigma", s));
    } else if (sig2) {
        for (const auto& s : list_of("sigma2", *sig2)) {
            const double s2 = to_double("sigma2", s);
            if (s2 < 0.0) throw ConfigError("sigma2 must be nonnegative");
            cfg.sigma_list.push_back(std::sqrt(s2));
        }
    } else if (cfg.command == Command::simulate) {
        cfg.sigma_list = {0.0};
    } else if (cfg.command == Command::verify_theory) {
        cfg.sigma_list = {std::sqrt(0.1)};
    } else {
        cfg.sigma_list = {0.1};
    }
    for (double s : cfg.sigma_list)
        if (s < 0.0) throw ConfigError("sigma must be nonnegative");
    if (cfg.command != Command::benchmark && cfg.command != Command::discover && cfg.sigma_list.size() != 1)
        throw ConfigError(to_string(cfg.command) + " takes a single sigma");

    if (const auto v = get("seed")) cfg.seed = to_unsigned("seed", *v);

    if (const auto v = get("method")) {
        for (const auto& s : list_of("method", *v)) {
            try {
                cfg.methods.push_back(discovery::parse_method(s));
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
        }
    } else if (cfg.command == Command::benchmark) {
        cfg.methods = {discovery::Method::dsindy, discovery::Method::l1sindy, discovery::Method::wsindy_lite};
    } else {
        cfg.methods = {discovery::Method::dsindy};
    }

    if (const auto v = get("gamma_mode")) {
        try {
            cfg.gamma_mode = discovery::parse_gamma_mode(*v);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }

    if (const auto v = get("replications")) {
        const long long r = to_integer("replications", *v);
        if (r < 1) throw ConfigError("replications must be >= 1");
        cfg.replications = int(r);
    } else {
        cfg.replications = cfg.command == Command::verify_theory ? 50 : cfg.command == Command::benchmark ? 10 : 1;
    }

    if (const auto v = get("output_dir")) {
        if (v->empty()) throw ConfigError("output_dir must not be empty");
        cfg.output_dir = *v;
    }
    if (const auto v = get("input")) {
        if (cfg.command != Command::denoise && cfg.command != Command::discover)
            throw ConfigError("input is only used by denoise and discover");
        cfg.input = *v;
    }
    if (const auto v = get("denoiser")) {
        if (*v != "psdn" && *v != "iterpsdn") throw ConfigError("denoiser must be psdn or iterpsdn");
        cfg.denoiser = *v;
    }
    if (const auto v = get("alpha")) {
        cfg.alpha = to_double("alpha", *v);
        if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    }
    if (const auto v = get("irw_iters")) {
        const long long k = to_integer("irw_iters", *v);
        if (k < 1) throw ConfigError("irw_iters must be >= 1");
        cfg.irw_iters = int(k);
    }
    if (const auto v = get("consistent_gramian")) cfg.consistent_gramian = to_bool("consistent_gramian", *v);
    if (const auto v = get("reconstruct")) cfg.reconstruct = to_bool("reconstruct", *v);
    if (const auto v = get("plots")) cfg.plots = to_bool("plots", *v);
    return cfg;
}

std::string render_manifest(const RunConfig& cfg, const std::string& version) {
    std::ostringstream os;
    os << "# odediscover " << version << "\n";
    os << "command = " << to_string(cfg.command) << "\n";
    os << "system = " << cfg.system << "\n";
    os << "N = " << join(cfg.n_list, [](Eigen::Index n) { return std::to_string(n); }) << "\n";
    if (cfg.t_end) os << "t_end = " << csv::format_double(*cfg.t_end) << "\n";
    os << "sigma = " << join(cfg.sigma_list, [](double s) { return csv::format_double(s); }) << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "method = " << join(cfg.methods, [](discovery::Method m) { return discovery::to_string(m); }) << "\n";
    os << "gamma_mode = " << discovery::to_string(cfg.gamma_mode) << "\n";
    os << "replications = " << cfg.replications << "\n";
    os << "output_dir = " << cfg.output_dir << "\n";
    if (!cfg.input.empty()) os << "input = " << cfg.input << "\n";
    os << "denoiser = " << cfg.denoiser << "\n";
    os << "alpha = " << csv::format_double(cfg.alpha) << "\n";
    os << "irw_iters = " << cfg.irw_iters << "\n";
    os << "consistent_gramian = " << (cfg.consistent_gramian ? "true" : "false") << "\n";
    os << "reconstruct = " << (cfg.reconstruct ? "true" : "false") << "\n";
    os << "plots = " << (cfg.plots ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace odediscover::config

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odediscover/discovery.hpp"

// Flat `key = value` run configuration shared by the config file, the
// command-line flags (same keys in --kebab-case) and the manifest.
namespace odediscover::config {

enum class Command { simulate, denoise, discover, verify_theory, benchmark };

Command parse_command(const std::string& s);
std::string to_string(Command c);

using KeyValues = std::map<std::string, std::string>;

/// Every accepted key, in manifest order.
const std::vector<std::string>& known_keys();

/// Reads `key = value` lines; '#' starts a comment. Unknown or repeated keys
/// are rejected.
KeyValues parse_file(const std::string& path);
KeyValues parse_text(const std::string& text, const std::string& origin = "<text>");

struct RunConfig {
    Command command = Command::discover;
    std::string system;
    std::vector<Eigen::Index> n_list;
    std::optional<double> t_end;
    std::vector<double> sigma_list;
    std::uint64_t seed = 0;
    std::vector<discovery::Method> methods;
    discovery::GammaMode gamma_mode = discovery::GammaMode::theory;
    int replications = 1;
    std::string output_dir = "out";
    std::string input;  // optional trajectory CSV for denoise/discover
    std::string denoiser = "iterpsdn";
    double alpha = 0.1;
    int irw_iters = 4;
    bool consistent_gramian = false;
    bool reconstruct = true;
    bool plots = true;
};

/// Validates and fills per-command defaults. Throws ConfigError.
RunConfig resolve(const KeyValues& kv);

/// Fully resolved config rendered as `key = value` lines, preceded by a
/// version comment. Feeding it back to resolve() gives the same RunConfig.
std::string render_manifest(const RunConfig& cfg, const std::string& version);

}  // namespace odediscover::config

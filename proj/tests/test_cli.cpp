#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "odediscover/cli.hpp"

using namespace odediscover;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (err_text) *err_text = err.str();
    return rc;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("odediscover_cli_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("simulate writes the trajectory schema and a manifest") {
    const auto dir = scratch("sim");
    CHECK(run({"simulate", "--system", "lorenz96", "--N", "2000", "--output-dir", dir.string()}) == 0);
    const std::string csv = slurp(dir / "trajectory.csv");
    CHECK(csv.rfind("t,u1,u2,u3,u4,u5,u6\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2001);
    CHECK(fs::exists(dir / "manifest"));
    CHECK(slurp(dir / "manifest").find("command = simulate") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("discover is byte-identical across reruns and from its manifest") {
    const auto a = scratch("disc_a"), b = scratch("disc_b"), c = scratch("disc_c");
    const std::vector<std::string> base{"discover", "--system", "duffing_ps2", "--N", "300", "--sigma", "0.1",
                                        "--seed", "7", "--method", "dsindy", "--gamma-mode", "theory"};
    auto with_dir = [&](const fs::path& d) {
        auto v = base;
        v.push_back("--output-dir");
        v.push_back(d.string());
        return v;
    };
    REQUIRE(run(with_dir(a)) == 0);
    REQUIRE(run(with_dir(b)) == 0);
    const std::string ra = slurp(a / "records.csv");
    CHECK(ra.find("coeff_rel_err") != std::string::npos);
    CHECK(ra == slurp(b / "records.csv"));
    CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));

    REQUIRE(run({"--config", (a / "manifest").string(), "--output-dir", c.string()}) == 0);
    CHECK(slurp(c / "records.csv") == ra);
    for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("exit codes") {
    std::string err;
    CHECK(run({"simulate", "--system", "unknown_system"}, &err) == cli::kExitConfig);
    CHECK(err.find('\n') == err.size() - 1);
    CHECK(run({"simulate", "--system", "lorenz96", "--bogus-flag", "1"}) == cli::kExitConfig);
    CHECK(run({"--system", "lorenz96"}) == cli::kExitConfig);
    CHECK(run({"simulate", "--config", "/nonexistent/file.cfg"}) == cli::kExitIo);
    CHECK(run({"simulate", "--system", "lorenz96", "--output-dir", "/proc/odediscover_cannot_write"}) == cli::kExitIo);
    CHECK(run({"--help"}) == cli::kExitOk);
    CHECK(run({"--version"}) == cli::kExitOk);
}

TEST_CASE("denoise writes denoised states and error records") {
    const auto dir = scratch("den");
    CHECK(run({"denoise", "--system", "duffing_ps1", "--N", "300", "--sigma", "0.2", "--output-dir", dir.string()}) == 0);
    for (const char* f : {"noisy.csv", "denoised.csv", "truth.csv", "records.csv", "denoised_u1.svg", "manifest"})
        CHECK(fs::exists(dir / f));
    // Feeding the noisy file back in works without ground truth.
    const auto dir2 = scratch("den2");
    CHECK(run({"denoise", "--system", "duffing_ps1", "--input", (dir / "noisy.csv").string(), "--output-dir",
               dir2.string()}) == 0);
    CHECK(fs::exists(dir2 / "denoised.csv"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("benchmark and verify-theory produce tables and plots") {
    const auto dir = scratch("bench");
    CHECK(run({"benchmark", "--system", "duffing_ps2", "--N", "200,300", "--sigma", "0.01,0.05", "--method",
               "wsindy-lite", "--replications", "2", "--output-dir", dir.string()}) == 0);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "coeff_rel_err_vs_N_sigma0p01.svg"));
    CHECK(fs::exists(dir / "coeff_rel_err_vs_sigma_N200.svg"));
    CHECK(slurp(dir / "coeff_rel_err_vs_N_sigma0p01.svg").rfind("<svg", 0) == 0);
    fs::remove_all(dir);

    const auto vt = scratch("vt");
    CHECK(run({"verify-theory", "--system", "duffing_ps1", "--sigma2", "0.1", "--N", "150,300", "--replications", "2",
               "--output-dir", vt.string()}) == 0);
    const std::string rec = slurp(vt / "records.csv");
    for (const char* m : {"known_phi", "psdn", "iterpsdn"}) CHECK(rec.find(m) != std::string::npos);
    CHECK(fs::exists(vt / "theory.csv"));
    CHECK(fs::exists(vt / "theory_u1.svg"));
    fs::remove_all(vt);
}

TEST_CASE("the installed binary agrees with the in-process runner") {
    const char* exe = std::getenv("ODEDISCOVER_CLI");
    if (!exe) return;
    const auto dir = scratch("exe");
    const std::string cmd = std::string(exe) + " simulate --system van_der_pol --N 100 --output-dir " + dir.string();
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "trajectory.csv"));
    const std::string bad = std::string(exe) + " simulate --system nope 2>/dev/null";
    const int rc = std::system(bad.c_str());
    CHECK(WEXITSTATUS(rc) == cli::kExitConfig);
    fs::remove_all(dir);
}

#include <doctest.h>

#include <cmath>

#include "odediscover/config.hpp"
#include "odediscover/errors.hpp"

using namespace odediscover;
using namespace odediscover::config;

TEST_CASE("parsing key = value text") {
    const auto kv = parse_text("# comment\ncommand = discover\n system=duffing_ps2 # trailing\n\nN = 250, 500\n");
    CHECK(kv.at("command") == "discover");
    CHECK(kv.at("system") == "duffing_ps2");
    CHECK(kv.at("N") == "250, 500");
    CHECK_THROWS_AS(parse_text("colour = blue\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("seed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_file("/nonexistent/config"), IoError);
}

TEST_CASE("per-command defaults") {
    const auto v = resolve({{"command", "verify-theory"}, {"system", "duffing_ps1"}});
    CHECK(v.n_list == std::vector<Eigen::Index>{250, 1000, 4000});
    CHECK(v.replications == 50);
    CHECK(v.sigma_list.front() == doctest::Approx(std::sqrt(0.1)));

    const auto s = resolve({{"command", "simulate"}, {"system", "lorenz96"}, {"N", "2000"}});
    CHECK(s.n_list.front() == 2000);
    CHECK(s.sigma_list.front() == 0.0);

    const auto b = resolve({{"command", "benchmark"}, {"system", "van_der_pol"}});
    CHECK(b.methods.size() == 3);

    const auto d = resolve({{"command", "verify-theory"}, {"system", "duffing_ps1"}, {"sigma2", "0.1"}});
    CHECK(d.sigma_list.front() == doctest::Approx(std::sqrt(0.1)));
}

TEST_CASE("validation rejects bad values before any work") {
    const KeyValues base{{"command", "discover"}, {"system", "duffing_ps2"}};
    auto with = [&](const std::string& k, const std::string& v) {
        auto kv = base;
        kv[k] = v;
        return kv;
    };
    CHECK_THROWS_AS(resolve({{"system", "duffing_ps2"}}), ConfigError);
    CHECK_THROWS_AS(resolve({{"command", "discover"}}), ConfigError);
    CHECK_THROWS_AS(resolve(with("command", "fly")), ConfigError);
    CHECK_THROWS_AS(resolve(with("system", "pendulum")), ConfigError);
    CHECK_THROWS_AS(resolve(with("N", "10")), ConfigError);
    CHECK_THROWS_AS(resolve(with("N", "1e3")), ConfigError);
    CHECK_THROWS_AS(resolve(with("sigma", "-0.1")), ConfigError);
    CHECK_THROWS_AS(resolve(with("sigma", "abc")), ConfigError);
    CHECK_THROWS_AS(resolve(with("seed", "-4")), ConfigError);
    CHECK_THROWS_AS(resolve(with("method", "sindy")), ConfigError);
    CHECK_THROWS_AS(resolve(with("gamma_mode", "auto")), ConfigError);
    CHECK_THROWS_AS(resolve(with("replications", "0")), ConfigError);
    CHECK_THROWS_AS(resolve(with("alpha", "1.5")), ConfigError);
    CHECK_THROWS_AS(resolve(with("plots", "maybe")), ConfigError);
    CHECK_THROWS_AS(resolve(with("unknown", "1")), ConfigError);
    auto both = with("sigma", "0.1");
    both["sigma2"] = "0.01";
    CHECK_THROWS_AS(resolve(both), ConfigError);
    CHECK_THROWS_AS(resolve({{"command", "simulate"}, {"system", "lorenz96"}, {"N", "100,200"}}), ConfigError);
}

TEST_CASE("manifest round trip") {
    const auto cfg = resolve({{"command", "benchmark"},
                              {"system", "duffing_ps2"},
                              {"N", "250,500"},
                              {"sigma2", "0.1"},
                              {"seed", "18446744073709551615"},
                              {"method", "dsindy,wsindy-lite"},
                              {"gamma_mode", "pareto"},
                              {"t_end", "7.5"}});
    const std::string text = render_manifest(cfg, "9.9.9");
    CHECK(text.rfind("# odediscover 9.9.9\n", 0) == 0);
    const auto again = resolve(parse_text(text));
    CHECK(render_manifest(again, "9.9.9") == text);
    CHECK(again.sigma_list == cfg.sigma_list);
    CHECK(again.seed == cfg.seed);
    CHECK(again.t_end == cfg.t_end);
    CHECK(again.methods == cfg.methods);
}

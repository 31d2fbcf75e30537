#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "odediscover/analysis.hpp"
#include "odediscover/errors.hpp"

using namespace odediscover;
using namespace odediscover::analysis;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("relative error trivial cases") {
    Vec t(3);
    t << 1, -2, 2;
    CHECK(relative_error(t, t) == 0.0);
    CHECK(relative_error(Vec::Zero(3), t) == doctest::Approx(1.0));
    Vec a(2), b(2);
    a << 1, 1;
    b << 1, 0;
    CHECK(relative_error(a, b) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_error(a, Vec::Zero(2)), InvalidArgument);
    CHECK_THROWS_AS(relative_error(a, t), InvalidDimension);
}

TEST_CASE("double-time reconstruction") {
    const auto sys = systems::builtin_system("duffing_ps2");
    const auto same = reconstruction_error(sys.true_coefficients, sys, Protocol::double_time);
    CHECK_FALSE(same.failed);
    CHECK(same.window == doctest::Approx(20.0));
    CHECK(same.rel_err.maxCoeff() < 1e-6);

    const auto zero = reconstruction_error(Mat::Zero(2, sys.basis.size()), sys, Protocol::double_time);
    CHECK(zero.rel_err(0) == doctest::Approx(1.0));
    CHECK(zero.failed);

    Mat bad = Mat::Zero(2, sys.basis.size());
    bad(0, sys.basis.position({2, 0})) = 5.0;  // u1' = 5 u1^2 escapes in finite time
    Mat nonfinite = bad;
    nonfinite(0, 0) = NAN;
    CHECK_THROWS(reconstruction_error(nonfinite, sys, Protocol::double_time));
}

TEST_CASE("horizon reconstruction on Lorenz 96") {
    const auto sys = systems::builtin_system("lorenz96");
    const auto same = reconstruction_error(sys.true_coefficients, sys, Protocol::horizon);
    CHECK(same.horizon == doctest::Approx(same.window));
    CHECK(same.window == doctest::Approx(sys.default_t_end));
    const auto zero = reconstruction_error(Mat::Zero(6, sys.basis.size()), sys, Protocol::horizon);
    CHECK(zero.horizon < 0.1);
}

TEST_CASE("theory estimates") {
    const auto sys = systems::builtin_system("duffing_ps1");
    const auto z = theory_estimates(sys, 200, 0.0, sys.basis, std::nullopt, 20000);
    CHECK(z.e_theory.isZero());
    CHECK(z.e_noisy.isZero());
    const Eigen::Index p1 = sys.basis.size() + 1;
    const auto eq = theory_estimates(sys, p1, 0.3, sys.basis, std::nullopt, 20000);
    CHECK((eq.e_theory - eq.e_noisy).norm() < 1e-12);
    CHECK(eq.gamma_exp == doctest::Approx(0.3 * std::sqrt(double(p1))));
    CHECK((eq.c1.array() > 0).all());
}

TEST_CASE("third derivative estimate on a linear oscillator") {
    // u'' = -u with u(0) = (0, 1): u1 = sin t, so max|u1'''| = 1 over a full period.
    systems::OdeSystem osc;
    osc.name = "osc";
    osc.m = 2;
    osc.rhs = [](const Vec& u) { return Vec((Vec(2) << u(1), -u(0)).finished()); };
    osc.default_ic = (Vec(2) << 0, 1).finished();
    const Vec m3 = max_third_derivative(osc, 7.0, 20000);
    CHECK(m3(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m3(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("monte carlo harness") {
    Study st;
    st.system = "duffing_ps2";
    st.n_list = {300};
    st.sigma_list = {0.0};
    st.methods = {discovery::Method::dsindy, discovery::Method::wsindy_lite};
    st.replications = 1;
    st.base_seed = 5;
    st.reconstruct = false;
    const auto recs = monte_carlo(st);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].method == "dsindy");
    CHECK(recs[1].method == "wsindy-lite");
    CHECK(recs[0].seed == recs[1].seed);
    CHECK(recs[0].error.empty());
    CHECK(recs[0].coeff_rel_err.maxCoeff() < 1e-2);

    st.replications = 0;
    CHECK_THROWS(monte_carlo(st));
}

TEST_CASE("records are sorted and byte-identical across reruns") {
    Study st;
    st.system = "duffing_ps2";
    st.n_list = {250, 200};
    st.sigma_list = {0.05};
    st.methods = {discovery::Method::wsindy_lite};
    st.replications = 2;
    st.base_seed = 11;
    const auto dir = std::filesystem::temp_directory_path();
    const auto a = (dir / "odediscover_records_a.csv").string();
    const auto b = (dir / "odediscover_records_b.csv").string();
    write_records_csv(a, flatten(monte_carlo(st)));
    st.threads = 1;
    write_records_csv(b, flatten(monte_carlo(st)));
    const std::string ta = slurp(a);
    CHECK(ta == slurp(b));
    CHECK(ta.rfind("system,method,N,sigma,seed,state,metric,value\n", 0) == 0);

    auto recs = flatten(monte_carlo(st));
    sort_records(recs);
    for (std::size_t i = 1; i < recs.size(); ++i) CHECK(recs[i - 1].n <= recs[i].n);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("summary statistics") {
    std::vector<Record> recs;
    for (int r = 0; r < 4; ++r) {
        recs.push_back({"s", "m", 100, 0.1, std::uint64_t(r), 1, "coeff_rel_err", double(r)});
        recs.push_back({"s", "m", 100, 0.1, std::uint64_t(r), 0, "failed", r == 3 ? 1.0 : 0.0});
    }
    const auto rows = summarize(recs);
    bool seen = false;
    for (const auto& row : rows)
        if (row.metric == "coeff_rel_err") {
            seen = true;
            CHECK(row.mean == doctest::Approx(1.5));
            CHECK(row.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
            CHECK(row.sem == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
            CHECK(row.count == 4);
            CHECK(row.failure_rate == doctest::Approx(0.25));
        }
    CHECK(seen);
}

TEST_CASE("theory study emits all three estimators") {
    TheoryStudy st;
    st.system = "duffing_ps1";
    st.n_list = {200};
    st.sigma = std::sqrt(0.1);
    st.replications = 2;
    const auto recs = verify_theory(st);
    int known = 0, psdn = 0, iter = 0;
    for (const auto& r : recs) {
        known += r.method == "known_phi";
        psdn += r.method == "psdn";
        iter += r.method == "iterpsdn";
    }
    CHECK(known == 8);  // 2 reps x 2 states x 2 metrics
    CHECK(psdn == 8);
    CHECK(iter == 8);
}

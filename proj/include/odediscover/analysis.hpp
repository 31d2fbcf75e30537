#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odediscover/basis.hpp"
#include "odediscover/discovery.hpp"
#include "odediscover/systems.hpp"
#include "odediscover/types.hpp"

namespace odediscover::analysis {

/// |est - truth| / |truth|.
double relative_error(const Vec& est, const Vec& truth);

enum class Protocol { double_time, horizon };

struct Reconstruction {
    Vec rel_err;              // per state, clamped to 1 (double_time)
    bool failed = false;
    double horizon = 0.0;     // seconds (horizon protocol)
    double window = 0.0;      // length of the simulated test window
};

/// double_time: simulate learned and true models from the training IC over
/// [0, 2 t_end] at dt; per-state whole-window relative error, failed when
/// any exceeds 1 or the learned model blows up.
/// horizon: start both from u*(t_end) and report the largest t over a window
/// of length t_end such that every state's cumulative relative error stays below 10%.
Reconstruction reconstruction_error(const Mat& learned, const systems::OdeSystem& truth, Protocol protocol,
                                    std::optional<double> t_end = std::nullopt, double dt = 0.01);

/// max_t |d^3 u_k / dt^3| from a dense clean simulation (fourth-order central
/// differences of the vector field along the path).
Vec max_third_derivative(const systems::OdeSystem& system, double t_end, Eigen::Index n_dense = 100000);

struct TheoryEstimates {
    Vec e_theory;   // sigma sqrt(p+1) / |u*_k|
    Vec e_noisy;    // sigma sqrt(N) / |u*_k|
    Vec c1;         // t_end^3 / 12 * max |u_k'''|
    double gamma_exp = 0.0;
};

TheoryEstimates theory_estimates(const systems::OdeSystem& system, Eigen::Index n, double sigma,
                                 const basis::MonomialBasis& basis, std::optional<double> t_end = std::nullopt,
                                 Eigen::Index n_dense = 100000);

/// Long-format measurement, one per (replication, state, metric). State 0
/// marks replication-level metrics.
struct Record {
    std::string system;
    std::string method;
    Eigen::Index n = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    int state = 0;
    std::string metric;
    double value = 0.0;
};

/// One replication's outcome for one method.
struct ExperimentRecord {
    std::string system, method;
    Eigen::Index n = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    Vec denoise_rel_err, deriv_rel_err, coeff_rel_err, recon_rel_err;
    bool failed = false;
    std::optional<double> prediction_horizon;
    std::string error;  // non-empty when the pipeline threw
    Mat coefficients;

    std::vector<Record> flatten() const;
};

struct Study {
    std::string system;
    std::vector<Eigen::Index> n_list;
    std::vector<double> sigma_list;
    std::vector<discovery::Method> methods{discovery::Method::dsindy};
    int replications = 1;
    std::uint64_t base_seed = 0;
    std::optional<double> t_end;
    discovery::DiscoveryOptions options;
    bool reconstruct = true;
    int threads = 0;  // 0: configured default, 1: serial reference path
};

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t grid_index, int replication);

/// Runs every (N, sigma) grid point x replication x method. Results are
/// ordered by (grid, replication, method) regardless of scheduling.
std::vector<ExperimentRecord> monte_carlo(const Study& study);

/// Projection errors of known-library, PSDN and IterPSDN denoising versus N.
struct TheoryStudy {
    std::string system;
    std::vector<Eigen::Index> n_list;
    double sigma = 0.0;
    int replications = 50;
    std::uint64_t base_seed = 0;
    std::optional<double> t_end;
    double alpha = 0.1;
    bool psdn_centered = true;
    bool check_diverg = true;  // IterPSDN revert guard, using the known sigma
    int threads = 0;
};

/// Records with method in {known_phi, psdn, iterpsdn} and metrics
/// sq_err = |P u - u*|^2 and rel_err = |P u - u*| / |u*|.
std::vector<Record> verify_theory(const TheoryStudy& study);

std::vector<Record> flatten(const std::vector<ExperimentRecord>& recs);
void sort_records(std::vector<Record>& recs);
void write_records_csv(const std::string& path, std::vector<Record> recs);

struct SummaryRow {
    std::string system, method;
    Eigen::Index n = 0;
    double sigma = 0.0;
    int state = 0;
    std::string metric;
    double mean = 0.0, std = 0.0, sem = 0.0;
    std::size_t count = 0;
    double failure_rate = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<Record>& recs);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

}  // namespace odediscover::analysis

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "odediscover/basis.hpp"
#include "odediscover/types.hpp"

namespace odediscover::systems {

using VectorField = std::function<Vec(const Vec&)>;

struct OdeSystem {
    std::string name;
    int m = 0;
    VectorField rhs;
    basis::MonomialBasis basis;  // declared basis for true_coefficients
    Mat true_coefficients;       // m x p, row k holds c_k
    Vec default_ic;
    double default_t_end = 0.0;
    int default_degree = 0;
};

std::vector<std::string> builtin_names();

/// duffing_ps1, duffing_ps2, van_der_pol, rossler, lorenz96.
OdeSystem builtin_system(const std::string& name);

/// System whose right-hand side is theta(u) * coefficients^T.
OdeSystem polynomial_system(const std::string& name, const basis::MonomialBasis& basis, const Mat& coefficients);

/// Classic RK4 on an n-point uniform grid over [0, t_end]; each output
/// interval is split into equal substeps no longer than max_step_fraction*t_end.
Trajectory simulate(const OdeSystem& system, const Vec& ic, double t_end, Eigen::Index n,
                    double max_step_fraction = 1e-3);

/// As simulate, but stops at the first non-finite state instead of throwing;
/// the returned trajectory then holds only the finite prefix.
Trajectory simulate_until_blowup(const OdeSystem& system, const Vec& ic, double t_end, Eigen::Index n,
                                 double max_step_fraction = 1e-3, bool* diverged = nullptr);

/// Adds sigma * N(0,1) with draws keyed by (seed, state, row).
Trajectory add_noise(const Trajectory& truth, double sigma, std::uint64_t seed);

/// Second-difference noise estimate per state.
Vec estimate_noise_std(const Trajectory& noisy);

/// rhs evaluated along a trajectory, N x m.
Mat evaluate_rhs(const OdeSystem& system, const Mat& states);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace odediscover::systems

#pragma once

#include <Eigen/Dense>

namespace odediscover {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class TrajectoryKind { truth, noisy, denoised };

/// Uniformly sampled states: one row per instant, one column per state.
struct Trajectory {
    Vec times;
    Mat values;
    TrajectoryKind kind = TrajectoryKind::truth;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index m() const { return values.cols(); }
    double t_end() const { return times.size() ? times(times.size() - 1) - times(0) : 0.0; }
    double dt() const { return times.size() > 1 ? t_end() / double(times.size() - 1) : 0.0; }
};

/// Throws unless `times` is strictly increasing with uniform spacing (1e-12 relative).
void validate_uniform_grid(const Vec& times);

/// Samples [0, t_end] at n equispaced points.
Vec uniform_grid(Eigen::Index n, double t_end);

}  // namespace odediscover

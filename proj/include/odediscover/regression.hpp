#pragma once

#include <optional>
#include <vector>

#include "odediscover/conic.hpp"
#include "odediscover/operators.hpp"
#include "odediscover/types.hpp"

namespace odediscover::regression {

/// Least-squares fit of u_tilde in the columns of phi_tilde, split into the
/// constant offset and the derivative theta_tilde * (fit without the offset).
struct InitialDerivative {
    double u0 = 0.0;
    Vec u_dot;
};
InitialDerivative initial_derivative_fit(const Mat& theta_tilde, const Mat& phi_tilde, const Vec& u_tilde);
Vec initial_derivative(const Mat& theta_tilde, const Mat& phi_tilde, const Vec& u_tilde);

double smoothing_radius(const operators::DifferenceStack& d, const Vec& u_dot_init);
double gamma_theory(double sigma, Eigen::Index p);

/// minimize ||M u_dot||_1  s.t. ||D u_dot|| <= C,  ||u0 + T u_dot - target|| <= gamma.
struct ConeProgram {
    Mat objective_map;  // p x N
    double smooth_radius = 0.0;
    Vec target;
    double data_radius = 0.0;
    double t_end = 1.0;
    conic::Settings solver;
};

struct SocpResult {
    double u0 = 0.0;
    Vec u_dot;
    conic::Status status = conic::Status::numerical_error;
    int iterations = 0;
    double objective = 0.0;          // ||M u_dot||_1 at the returned point
    double dual_bound = 0.0;
    double data_residual = 0.0;      // ||u0 + T u_dot - target||
    double smooth_violation = 0.0;   // max(0, ||D u_dot|| - C)
    double data_violation = 0.0;     // max(0, data_residual - gamma)
};

SocpResult solve_socp(const ConeProgram& prog);

/// G^{-1} theta^T. Without a Gramian this is the pseudoinverse of theta,
/// i.e. the G = theta^T theta choice computed without squaring the condition number.
Mat coefficient_map(const Mat& theta_tilde, const std::optional<Mat>& gram = std::nullopt);

/// W_jj = 1 / (|c_j| + eps * max|c|); identity if c is all zero.
Vec irw_weights(const Vec& c, double eps_w, bool* fell_back = nullptr);

struct IrwSocpResult {
    Vec coefficients;
    Vec u_dot;
    double u0 = 0.0;
    std::vector<Vec> coefficient_trail;
    std::vector<double> gamma_used;
    std::vector<conic::Status> status;
    std::vector<bool> weight_fallback;
    int irw_iterations = 0;
};

/// Reweighted SOCP sequence for one state. gamma_schedule holds one value per
/// iteration, or a single value used throughout.
IrwSocpResult irw_socp(const Vec& u_tilde, const Mat& theta_tilde, const Mat& phi_tilde, const Mat& coef_map,
                       const std::vector<double>& gamma_schedule, double C, int irw_iters, double eps_w = 1e-4,
                       const conic::Settings& solver = {});

/// minimize ||T u_dot - u||^2 + lambda ||D u_dot||^2. lambda = 0 gives the minimum-norm solution.
Vec tikhonov_derivative(const Vec& u, const operators::TrapezoidMatrix& trap, const operators::DifferenceStack& d,
                        double lambda);

struct LassoResult {
    Vec c;
    double gap = 0.0;
    int sweeps = 0;
};

/// Coordinate descent for ||A c - b||^2 + lambda sum_j w_j |c_j|, stopped on a
/// relative duality gap.
LassoResult weighted_lasso(const Mat& a, const Vec& b, double lambda, const Vec& weights, double gap_tol = 1e-8,
                           int max_sweeps = 100000);

/// Reweighted Lasso: W = I first, then w_j = 1 / (|c_j| + eps_w).
Vec irw_lasso(const Mat& a, const Vec& b, double lambda, int irw_iters, double eps_w = 1e-4);

/// Sequential thresholding least squares. With an upper bound, coefficients
/// above it are zeroed as well.
Vec stls(const Mat& a, const Vec& b, double threshold, std::optional<double> upper_bound = std::nullopt,
         int max_iters = 100);

struct MstlsSelection {
    Vec c;
    double lambda = 0.0;
    double loss = 0.0;
    std::vector<double> losses;
};

/// Scans lambda_grid with the column-normalized bounds
/// L_j = lambda max(1, |b|/|H_j|), U_j = min(1, |b|/|H_j|) / lambda and picks
/// the minimizer of |H(c - c_ls)|/|H c_ls| + |c|_0 / p.
MstlsSelection mstls_select(const Mat& h, const Vec& b, const std::vector<double>& lambda_grid);

std::vector<double> default_mstls_grid();

}  // namespace odediscover::regression

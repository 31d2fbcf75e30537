#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "odediscover/types.hpp"

// Primal-dual interior point method for
//     minimize c^T x  s.t.  G x + s = h,  A x = b,  s in K,
// with K a product of a nonnegative orthant and second-order cones, using
// Nesterov-Todd scaling and a Mehrotra predictor-corrector. The reduced KKT
// system stays sparse: each cone's scaling contributes a sparse G_q^T G_q
// block plus a few rank-one terms, which are folded in by Sherman-Morrison-
// Woodbury against a sparse LU factorization.
namespace odediscover::conic {

using SpMat = Eigen::SparseMatrix<double>;

struct ConeDims {
    Eigen::Index nonneg = 0;
    std::vector<Eigen::Index> soc;
    Eigen::Index total() const;
    Eigen::Index degree() const { return nonneg + Eigen::Index(soc.size()); }
};

struct Problem {
    Vec c;
    SpMat G;
    Vec h;
    SpMat A;  // may have zero rows
    Vec b;
    ConeDims dims;
};

struct Settings {
    double feastol = 1e-8;
    double reltol = 1e-8;
    double abstol = 1e-10;
    int max_iters = 100;
    int refinement = 3;
};

enum class Status { optimal, max_iterations, numerical_error };
std::string to_string(Status s);

struct Solution {
    Vec x, y, z, s;
    Status status = Status::numerical_error;
    int iterations = 0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;
    double relative_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

Solution solve(const Problem& prob, const Settings& settings = {});

// Cone algebra, exposed for testing.
namespace detail {

/// Largest t with x + t*dx in the cone product (infinite when unbounded).
double max_step(const Vec& x, const Vec& dx, const ConeDims& dims);
/// Jordan product x o y, blockwise.
Vec jordan_product(const Vec& x, const Vec& y, const ConeDims& dims);
/// Solves lambda o x = u for x.
Vec jordan_divide(const Vec& lambda, const Vec& u, const ConeDims& dims);

/// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
struct Scaling {
    Vec d;                      // nonnegative block: W = diag(d)
    std::vector<double> beta;   // per SOC
    std::vector<Vec> v;         // per SOC, W = beta (2 v v^T - J)
};
Scaling nt_scaling(const Vec& s, const Vec& z, const ConeDims& dims);
Vec apply_w(const Scaling& w, const Vec& x, const ConeDims& dims, bool inverse);

}  // namespace detail

}  // namespace odediscover::conic

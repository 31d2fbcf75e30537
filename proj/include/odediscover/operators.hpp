#pragma once

#include <Eigen/Sparse>

#include "odediscover/types.hpp"

namespace odediscover::operators {

using SpMat = Eigen::SparseMatrix<double>;

inline constexpr double kDefaultRankTol = 1e-10;

/// Cumulative trapezoid quadrature on a uniform grid. Row 0 is zero, row i is
/// (dt/2)[1,2,...,2,1] over columns 0..i. Applied matrix-free in O(n).
///
/// Factorizes as T = S*K with S the lower-triangular ones matrix and K the
/// bidiagonal "increment" map (K x)_i = dt/2 (x_{i-1} + x_i), (K x)_0 = 0.
/// S^{-1} is the bidiagonal backward difference, which keeps T out of any
/// sparse system that needs it.
class TrapezoidMatrix {
public:
    TrapezoidMatrix(Eigen::Index n, double dt);

    Eigen::Index n() const { return n_; }
    double dt() const { return dt_; }

    Vec apply(const Vec& x) const;
    Mat apply(const Mat& x) const;
    Vec apply_transpose(const Vec& y) const;
    Mat dense() const;

    SpMat increments() const;     // K
    SpMat cumsum_inverse() const;  // S^{-1}

private:
    Eigen::Index n_;
    double dt_;
};

TrapezoidMatrix build_trapezoid(Eigen::Index n, double t_end);

/// Stacked [I; D1; D2], shape (3n-3) x n.
class DifferenceStack {
public:
    DifferenceStack(Eigen::Index n, double dt);

    Eigen::Index n() const { return n_; }
    Eigen::Index rows() const { return 3 * n_ - 3; }
    double dt() const { return dt_; }

    Vec apply(const Vec& x) const;
    Vec apply_transpose(const Vec& y) const;
    Vec first_difference(const Vec& x) const;
    Vec second_difference(const Vec& x) const;
    Mat dense() const;
    SpMat sparse() const;

private:
    Eigen::Index n_;
    double dt_;
};

DifferenceStack build_difference_stack(Eigen::Index n, double t_end);

/// Orthogonal projector onto the column space of a source matrix, built from
/// its left singular vectors above rank_tol * sigma_max.
class Projector {
public:
    explicit Projector(const Mat& source, double rank_tol = kDefaultRankTol);

    Eigen::Index rank() const { return basis_.cols(); }
    const Mat& basis() const { return basis_; }

    Vec apply(const Vec& x) const;
    Mat apply(const Mat& x) const;
    Vec apply_complement(const Vec& x) const { return x - apply(x); }
    Mat dense() const { return basis_ * basis_.transpose(); }

private:
    Mat basis_;
};

/// Truncated-SVD pseudoinverse, kept factored so it can be applied repeatedly.
class Pseudoinverse {
public:
    explicit Pseudoinverse(const Mat& source, double rank_tol = kDefaultRankTol);

    Eigen::Index rank() const { return s_.size(); }
    Eigen::Index rows() const { return rows_; }  // of the source
    Eigen::Index cols() const { return cols_; }
    const Vec& singular_values() const { return s_; }

    Vec apply(const Vec& x) const;
    Mat apply(const Mat& x) const;
    Mat dense() const;  // cols x rows
    /// Largest singular value of the pseudoinverse, i.e. 1/sigma_min(source).
    double norm() const;

private:
    Eigen::Index rows_, cols_;
    Mat u_, v_;
    Vec s_;
};

Vec project(const Mat& source, const Vec& x, double rank_tol = kDefaultRankTol);
Vec pseudoinverse_apply(const Mat& source, const Vec& x, double rank_tol = kDefaultRankTol);

}  // namespace odediscover::operators

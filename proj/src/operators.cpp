#include "odediscover/operators.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "odediscover/errors.hpp"

namespace odediscover {

void validate_uniform_grid(const Vec& times) {
    const Eigen::Index n = times.size();
    if (n < 2) return;
    const double h = (times(n - 1) - times(0)) / double(n - 1);
    if (!(h > 0.0)) throw InvalidArgument("time grid must be strictly increasing");
    for (Eigen::Index i = 1; i < n; ++i) {
        const double step = times(i) - times(i - 1);
        if (!(step > 0.0)) throw InvalidArgument("time grid must be strictly increasing");
        // Uniformity of the sample positions; step-wise checks would flag
        // ordinary rounding in times built as i*dt.
        const double expected = times(0) + double(i) * h;
        if (std::abs(times(i) - expected) > 1e-12 * std::max(std::abs(expected), h * double(n - 1)))
            throw InvalidArgument("non-uniform time grid at sample " + std::to_string(i));
    }
}

Vec uniform_grid(Eigen::Index n, double t_end) {
    Vec t(n);
    if (n == 1) {
        t(0) = 0.0;
        return t;
    }
    const double h = t_end / double(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) t(i) = double(i) * h;
    t(n - 1) = t_end;
    return t;
}

}  // namespace odediscover

namespace odediscover::operators {

TrapezoidMatrix::TrapezoidMatrix(Eigen::Index n, double dt) : n_(n), dt_(dt) {
    if (n < 2) throw InvalidDimension("trapezoid operator needs n >= 2, got " + std::to_string(n));
    if (!(dt > 0.0)) throw InvalidArgument("trapezoid operator needs dt > 0");
}

TrapezoidMatrix build_trapezoid(Eigen::Index n, double t_end) {
    if (n < 2) throw InvalidDimension("trapezoid operator needs n >= 2, got " + std::to_string(n));
    if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
    return TrapezoidMatrix(n, t_end / double(n - 1));
}

Vec TrapezoidMatrix::apply(const Vec& x) const {
    if (x.size() != n_) throw InvalidDimension("trapezoid apply: length mismatch");
    Vec y(n_);
    y(0) = 0.0;
    const double h = 0.5 * dt_;
    for (Eigen::Index i = 1; i < n_; ++i) y(i) = y(i - 1) + h * (x(i - 1) + x(i));
    return y;
}

Mat TrapezoidMatrix::apply(const Mat& x) const {
    if (x.rows() != n_) throw InvalidDimension("trapezoid apply: row mismatch");
    Mat y(n_, x.cols());
    const double h = 0.5 * dt_;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        y(0, c) = 0.0;
        for (Eigen::Index i = 1; i < n_; ++i) y(i, c) = y(i - 1, c) + h * (x(i - 1, c) + x(i, c));
    }
    return y;
}

Vec TrapezoidMatrix::apply_transpose(const Vec& y) const {
    if (y.size() != n_) throw InvalidDimension("trapezoid transpose: length mismatch");
    // T^T = K^T S^T; S^T is a reverse cumulative sum.
    Vec r(n_);
    r(n_ - 1) = y(n_ - 1);
    for (Eigen::Index i = n_ - 2; i >= 0; --i) r(i) = r(i + 1) + y(i);
    Vec x = Vec::Zero(n_);
    const double h = 0.5 * dt_;
    for (Eigen::Index i = 1; i < n_; ++i) {
        x(i - 1) += h * r(i);
        x(i) += h * r(i);
    }
    return x;
}

Mat TrapezoidMatrix::dense() const {
    Mat t = Mat::Zero(n_, n_);
    const double h = 0.5 * dt_;
    for (Eigen::Index i = 1; i < n_; ++i) {
        t(i, 0) = h;
        for (Eigen::Index j = 1; j < i; ++j) t(i, j) = 2.0 * h;
        t(i, i) = h;
    }
    return t;
}

SpMat TrapezoidMatrix::increments() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * n_);
    const double h = 0.5 * dt_;
    for (Eigen::Index i = 1; i < n_; ++i) {
        trip.emplace_back(i, i - 1, h);
        trip.emplace_back(i, i, h);
    }
    SpMat k(n_, n_);
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

SpMat TrapezoidMatrix::cumsum_inverse() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
        trip.emplace_back(i, i, 1.0);
        if (i > 0) trip.emplace_back(i, i - 1, -1.0);
    }
    SpMat b(n_, n_);
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
}

DifferenceStack::DifferenceStack(Eigen::Index n, double dt) : n_(n), dt_(dt) {
    if (n < 3) throw InvalidDimension("difference stack needs n >= 3, got " + std::to_string(n));
    if (!(dt > 0.0)) throw InvalidArgument("difference stack needs dt > 0");
}

DifferenceStack build_difference_stack(Eigen::Index n, double t_end) {
    if (n < 3) throw InvalidDimension("difference stack needs n >= 3, got " + std::to_string(n));
    if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
    return DifferenceStack(n, t_end / double(n - 1));
}

Vec DifferenceStack::first_difference(const Vec& x) const {
    if (x.size() != n_) throw InvalidDimension("difference stack: length mismatch");
    return (x.tail(n_ - 1) - x.head(n_ - 1)) / dt_;
}

Vec DifferenceStack::second_difference(const Vec& x) const {
    if (x.size() != n_) throw InvalidDimension("difference stack: length mismatch");
    return (x.tail(n_ - 2) - 2.0 * x.segment(1, n_ - 2) + x.head(n_ - 2)) / (dt_ * dt_);
}

Vec DifferenceStack::apply(const Vec& x) const {
    Vec y(rows());
    y.head(n_) = x;
    y.segment(n_, n_ - 1) = first_difference(x);
    y.tail(n_ - 2) = second_difference(x);
    return y;
}

Vec DifferenceStack::apply_transpose(const Vec& y) const {
    if (y.size() != rows()) throw InvalidDimension("difference stack transpose: length mismatch");
    Vec x = y.head(n_);
    const double a = 1.0 / dt_;
    const double b = 1.0 / (dt_ * dt_);
    for (Eigen::Index i = 0; i < n_ - 1; ++i) {
        const double v = a * y(n_ + i);
        x(i) -= v;
        x(i + 1) += v;
    }
    for (Eigen::Index i = 0; i < n_ - 2; ++i) {
        const double v = b * y(2 * n_ - 1 + i);
        x(i) += v;
        x(i + 1) -= 2.0 * v;
        x(i + 2) += v;
    }
    return x;
}

SpMat DifferenceStack::sparse() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(6 * n_);
    const double a = 1.0 / dt_;
    const double b = 1.0 / (dt_ * dt_);
    for (Eigen::Index i = 0; i < n_; ++i) trip.emplace_back(i, i, 1.0);
    for (Eigen::Index i = 0; i < n_ - 1; ++i) {
        trip.emplace_back(n_ + i, i, -a);
        trip.emplace_back(n_ + i, i + 1, a);
    }
    for (Eigen::Index i = 0; i < n_ - 2; ++i) {
        const Eigen::Index r = 2 * n_ - 1 + i;
        trip.emplace_back(r, i, b);
        trip.emplace_back(r, i + 1, -2.0 * b);
        trip.emplace_back(r, i + 2, b);
    }
    SpMat d(rows(), n_);
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

Mat DifferenceStack::dense() const { return Mat(sparse()); }

namespace {

struct ThinSvd {
    Mat u, v;
    Vec s;
};

ThinSvd truncated_svd(const Mat& a, double rank_tol) {
    ThinSvd out;
    if (a.size() == 0) {
        out.u.resize(a.rows(), 0);
        out.v.resize(a.cols(), 0);
        return out;
    }
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    Eigen::Index r = 0;
    if (smax > 0.0)
        while (r < s.size() && s(r) > rank_tol * smax) ++r;
    out.u = svd.matrixU().leftCols(r);
    out.v = svd.matrixV().leftCols(r);
    out.s = s.head(r);
    return out;
}

}  // namespace

Projector::Projector(const Mat& source, double rank_tol) {
    basis_ = truncated_svd(source, rank_tol).u;
}

Vec Projector::apply(const Vec& x) const {
    if (x.size() != basis_.rows()) throw InvalidDimension("projector: length mismatch");
    if (basis_.cols() == 0) return Vec::Zero(x.size());
    return basis_ * (basis_.transpose() * x);
}

Mat Projector::apply(const Mat& x) const {
    if (x.rows() != basis_.rows()) throw InvalidDimension("projector: row mismatch");
    if (basis_.cols() == 0) return Mat::Zero(x.rows(), x.cols());
    return basis_ * (basis_.transpose() * x);
}

Pseudoinverse::Pseudoinverse(const Mat& source, double rank_tol)
    : rows_(source.rows()), cols_(source.cols()) {
    ThinSvd f = truncated_svd(source, rank_tol);
    u_ = std::move(f.u);
    v_ = std::move(f.v);
    s_ = std::move(f.s);
}

Vec Pseudoinverse::apply(const Vec& x) const {
    if (x.size() != rows_) throw InvalidDimension("pseudoinverse: length mismatch");
    if (s_.size() == 0) return Vec::Zero(cols_);
    return v_ * ((u_.transpose() * x).cwiseQuotient(s_));
}

Mat Pseudoinverse::apply(const Mat& x) const {
    if (x.rows() != rows_) throw InvalidDimension("pseudoinverse: row mismatch");
    if (s_.size() == 0) return Mat::Zero(cols_, x.cols());
    return v_ * (s_.cwiseInverse().asDiagonal() * (u_.transpose() * x));
}

Mat Pseudoinverse::dense() const {
    if (s_.size() == 0) return Mat::Zero(cols_, rows_);
    return v_ * s_.cwiseInverse().asDiagonal() * u_.transpose();
}

double Pseudoinverse::norm() const { return s_.size() ? 1.0 / s_(s_.size() - 1) : 0.0; }

Vec project(const Mat& source, const Vec& x, double rank_tol) {
    if (source.rows() != x.size()) throw InvalidDimension("project: source rows must match x");
    return Projector(source, rank_tol).apply(x);
}

Vec pseudoinverse_apply(const Mat& source, const Vec& x, double rank_tol) {
    if (source.rows() != x.size())
        throw InvalidDimension("pseudoinverse_apply: source rows must match x");
    return Pseudoinverse(source, rank_tol).apply(x);
}

}  // namespace odediscover::operators

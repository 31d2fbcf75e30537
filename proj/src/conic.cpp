#include "odediscover/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "odediscover/errors.hpp"

namespace odediscover::conic {

Eigen::Index ConeDims::total() const {
    Eigen::Index t = nonneg;
    for (auto q : soc) t += q;
    return t;
}

std::string to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::max_iterations: return "max_iterations";
        case Status::numerical_error: return "numerical_error";
    }
    return "unknown";
}

namespace detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Eigen::Index> soc_offsets(const ConeDims& dims) {
    std::vector<Eigen::Index> off;
    Eigen::Index o = dims.nonneg;
    for (auto q : dims.soc) {
        off.push_back(o);
        o += q;
    }
    return off;
}

// (x0 - |x1|)(x0 + |x1|), computed without the cancellation of x0^2 - |x1|^2.
double jnorm2(const Eigen::Ref<const Vec>& x) {
    const double r = x.tail(x.size() - 1).norm();
    return (x(0) - r) * (x(0) + r);
}

double soc_step(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& dx) {
    // Largest t >= 0 with x + t dx in the cone; x is assumed interior.
    const auto x1 = x.tail(x.size() - 1);
    const auto d1 = dx.tail(dx.size() - 1);
    const double a = dx(0) * dx(0) - d1.squaredNorm();
    const double b = 2.0 * (x(0) * dx(0) - x1.dot(d1));
    const double c = jnorm2(x);
    if (c <= 0.0) return 0.0;
    double best = kInf;
    const double disc = b * b - 4.0 * a * c;
    if (a == 0.0) {
        if (b < 0.0) best = -c / b;
    } else if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
        for (double r : {q / a, q != 0.0 ? c / q : kInf})
            if (r > 0.0) best = std::min(best, r);
    }
    // The leading coordinate must stay nonnegative too (guards the -K sheet).
    if (dx(0) < 0.0) best = std::min(best, -x(0) / dx(0));
    return best;
}

}  // namespace

double max_step(const Vec& x, const Vec& dx, const ConeDims& dims) {
    double t = kInf;
    for (Eigen::Index i = 0; i < dims.nonneg; ++i)
        if (dx(i) < 0.0) t = std::min(t, -x(i) / dx(i));
    const auto off = soc_offsets(dims);
    for (std::size_t k = 0; k < dims.soc.size(); ++k)
        t = std::min(t, soc_step(x.segment(off[k], dims.soc[k]), dx.segment(off[k], dims.soc[k])));
    return t;
}

Vec jordan_product(const Vec& x, const Vec& y, const ConeDims& dims) {
    Vec out(x.size());
    out.head(dims.nonneg) = x.head(dims.nonneg).cwiseProduct(y.head(dims.nonneg));
    const auto off = soc_offsets(dims);
    for (std::size_t k = 0; k < dims.soc.size(); ++k) {
        const Eigen::Index o = off[k], q = dims.soc[k];
        const auto xs = x.segment(o, q);
        const auto ys = y.segment(o, q);
        out(o) = xs.dot(ys);
        out.segment(o + 1, q - 1) = xs(0) * ys.tail(q - 1) + ys(0) * xs.tail(q - 1);
    }
    return out;
}

Vec jordan_divide(const Vec& lambda, const Vec& u, const ConeDims& dims) {
    Vec out(u.size());
    out.head(dims.nonneg) = u.head(dims.nonneg).cwiseQuotient(lambda.head(dims.nonneg));
    const auto off = soc_offsets(dims);
    for (std::size_t k = 0; k < dims.soc.size(); ++k) {
        const Eigen::Index o = off[k], q = dims.soc[k];
        const auto l = lambda.segment(o, q);
        const auto us = u.segment(o, q);
        const double x0 = (l(0) * us(0) - l.tail(q - 1).dot(us.tail(q - 1))) / jnorm2(l);
        out(o) = x0;
        out.segment(o + 1, q - 1) = (us.tail(q - 1) - x0 * l.tail(q - 1)) / l(0);
    }
    return out;
}

Scaling nt_scaling(const Vec& s, const Vec& z, const ConeDims& dims) {
    Scaling w;
    w.d = (s.head(dims.nonneg).array() / z.head(dims.nonneg).array()).sqrt();
    const auto off = soc_offsets(dims);
    for (std::size_t k = 0; k < dims.soc.size(); ++k) {
        const Eigen::Index o = off[k], q = dims.soc[k];
        const Vec ss = s.segment(o, q);
        const Vec zz = z.segment(o, q);
        const double sn = std::sqrt(jnorm2(ss));
        const double zn = std::sqrt(jnorm2(zz));
        const Vec sb = ss / sn;
        const Vec zb = zz / zn;
        const double g = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
        Vec wb = sb;
        wb(0) += zb(0);
        wb.tail(q - 1) -= zb.tail(q - 1);
        wb /= 2.0 * g;
        Vec v = wb;
        v(0) += 1.0;
        v /= std::sqrt(2.0 * (wb(0) + 1.0));
        w.beta.push_back(std::sqrt(sn / zn));
        w.v.push_back(std::move(v));
    }
    return w;
}

Vec apply_w(const Scaling& w, const Vec& x, const ConeDims& dims, bool inverse) {
    Vec out(x.size());
    if (inverse)
        out.head(dims.nonneg) = x.head(dims.nonneg).cwiseQuotient(w.d);
    else
        out.head(dims.nonneg) = x.head(dims.nonneg).cwiseProduct(w.d);
    const auto off = soc_offsets(dims);
    for (std::size_t k = 0; k < dims.soc.size(); ++k) {
        const Eigen::Index o = off[k], q = dims.soc[k];
        const Vec& v = w.v[k];
        const auto xs = x.segment(o, q);
        Vec jx = xs;
        jx.tail(q - 1) *= -1.0;
        if (!inverse) {
            // beta (2 v v^T x - J x)
            out.segment(o, q) = w.beta[k] * (2.0 * v.dot(xs) * v - jx);
        } else {
            // beta^{-1} (2 J v v^T J x - J x)
            Vec jv = v;
            jv.tail(q - 1) *= -1.0;
            out.segment(o, q) = (2.0 * v.dot(jx) * jv - jx) / w.beta[k];
        }
    }
    return out;
}

}  // namespace detail

namespace {

using detail::Scaling;

Scaling identity_scaling(const ConeDims& dims) {
    Scaling w;
    w.d = Vec::Ones(dims.nonneg);
    for (auto q : dims.soc) {
        Vec v = Vec::Zero(q);
        v(0) = 1.0;
        w.beta.push_back(1.0);
        w.v.push_back(std::move(v));
    }
    return w;
}

Vec unit_e(const ConeDims& dims) {
    Vec e = Vec::Zero(dims.total());
    e.head(dims.nonneg).setOnes();
    Eigen::Index o = dims.nonneg;
    for (auto q : dims.soc) {
        e(o) = 1.0;
        o += q;
    }
    return e;
}

// Smallest t with x + t e in the cone, i.e. minus the smallest eigenvalue.
double shift_to_interior(const Vec& x, const ConeDims& dims) {
    double t = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dims.nonneg; ++i) t = std::max(t, -x(i));
    Eigen::Index o = dims.nonneg;
    for (auto q : dims.soc) {
        t = std::max(t, x.segment(o + 1, q - 1).norm() - x(o));
        o += q;
    }
    return t;
}

class KktSolver {
public:
    KktSolver(const Problem& p) : p_(p), nx_(p.c.size()), ny_(p.b.size()) {
        Eigen::Index o = p.dims.nonneg;
        gl_ = p.G.topRows(p.dims.nonneg);
        for (auto q : p.dims.soc) {
            SpMat gq = p.G.middleRows(o, q);
            gram_.push_back(SpMat(gq.transpose() * gq));
            gq_.push_back(std::move(gq));
            o += q;
        }
        at_ = p.A.transpose();
    }

    // Reduced system: (G^T W^{-2} G) dx + A^T dy = rx,  A dx = ry.
    bool factor(const Scaling& w) {
        w_ = &w;
        SpMat h = SpMat(gl_.transpose() * w.d.cwiseInverse().cwiseAbs2().asDiagonal() * gl_);
        for (std::size_t k = 0; k < gq_.size(); ++k) h += gram_[k] / (w.beta[k] * w.beta[k]);

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(h.nonZeros() + 2 * p_.A.nonZeros() + nx_));
        for (int c = 0; c < h.outerSize(); ++c)
            for (SpMat::InnerIterator it(h, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (int c = 0; c < p_.A.outerSize(); ++c)
            for (SpMat::InnerIterator it(p_.A, c); it; ++it) {
                trip.emplace_back(nx_ + it.row(), it.col(), it.value());
                trip.emplace_back(it.col(), nx_ + it.row(), it.value());
            }
        SpMat k(nx_ + ny_, nx_ + ny_);
        k.setFromTriplets(trip.begin(), trip.end());
        k.makeCompressed();
        lu_.compute(k);
        if (lu_.info() != Eigen::Success) return false;

        // Low-rank remainder of each cone's G_q^T W_q^{-2} G_q.
        std::vector<Vec> cols;
        std::vector<double> coef;
        for (std::size_t q = 0; q < gq_.size(); ++q) {
            const Vec& v = w.v[q];
            Vec jv = v;
            jv.tail(jv.size() - 1) *= -1.0;
            const Vec a = gq_[q].transpose() * jv;
            const Vec b = gq_[q].transpose() * v;
            const double ib2 = 1.0 / (w.beta[q] * w.beta[q]);
            auto push = [&](Vec u, double c) {
                if (u.squaredNorm() > 0.0) {
                    cols.push_back(std::move(u));
                    coef.push_back(c);
                }
            };
            push(a, 4.0 * v.squaredNorm() * ib2);
            push(a + b, -ib2);
            push(a - b, ib2);
        }
        const Eigen::Index r = Eigen::Index(cols.size());
        u_.resize(nx_, r);
        sigma_.resize(r);
        for (Eigen::Index j = 0; j < r; ++j) {
            u_.col(j) = cols[std::size_t(j)];
            sigma_(j) = coef[std::size_t(j)];
        }
        if (r > 0) {
            Mat rhs = Mat::Zero(nx_ + ny_, r);
            rhs.topRows(nx_) = u_;
            z_ = lu_.solve(rhs);
            Mat cap = Mat::Identity(r, r) + sigma_.asDiagonal() * (u_.transpose() * z_.topRows(nx_));
            cap_ = cap.fullPivLu();
        }
        return z_.allFinite() || r == 0;
    }

    // Solves [0 A^T G^T; A 0 0; G 0 -W^2] (dx, dy, dz) = (bx, by, bz). Refinement runs on the
    // unreduced system: near the boundary W^{-2} is badly conditioned and recovering dz from the
    // reduced solution alone leaves a visible dual residual.
    void solve(const Vec& bx, const Vec& by, const Vec& bz, Vec& dx, Vec& dy, Vec& dz, int refinement) const {
        reduced(bx, by, bz, dx, dy, dz);
        const double scale = bx.norm() + by.norm() + bz.norm();
        for (int it = 0; it < refinement; ++it) {
            const Vec r1 = bx - at_ * dy - p_.G.transpose() * dz;
            const Vec r2 = by - p_.A * dx;
            const Vec r3 = bz - p_.G * dx + w2(dz);
            if (!(r1.norm() + r2.norm() + r3.norm() > 1e-15 * scale)) break;
            Vec ex, ey, ez;
            reduced(r1, r2, r3, ex, ey, ez);
            dx += ex;
            dy += ey;
            dz += ez;
        }
    }

private:
    void reduced(const Vec& bx, const Vec& by, const Vec& bz, Vec& dx, Vec& dy, Vec& dz) const {
        Vec rhs(nx_ + ny_);
        rhs.head(nx_) = bx + p_.G.transpose() * winv2(bz);
        rhs.tail(ny_) = by;
        Vec sol = smw(rhs);
        const Vec res = rhs - apply(sol);
        sol += smw(res);
        dx = sol.head(nx_);
        dy = sol.tail(ny_);
        dz = winv2(p_.G * dx - bz);
    }

    Vec w2(const Vec& x) const {
        return detail::apply_w(*w_, detail::apply_w(*w_, x, p_.dims, false), p_.dims, false);
    }

    Vec winv2(const Vec& x) const {
        return detail::apply_w(*w_, detail::apply_w(*w_, x, p_.dims, true), p_.dims, true);
    }

    Vec apply(const Vec& sol) const {
        const Vec x = sol.head(nx_);
        Vec out(nx_ + ny_);
        out.head(nx_) = p_.G.transpose() * winv2(p_.G * x) + at_ * sol.tail(ny_);
        out.tail(ny_) = p_.A * x;
        return out;
    }

    Vec smw(const Vec& rhs) const {
        Vec q = lu_.solve(rhs);
        if (u_.cols() == 0) return q;
        const Vec t = cap_.solve(Vec(sigma_.cwiseProduct(u_.transpose() * q.head(nx_))));
        return q - z_ * t;
    }

    const Problem& p_;
    Eigen::Index nx_, ny_;
    SpMat gl_, at_;
    std::vector<SpMat> gq_, gram_;
    const Scaling* w_ = nullptr;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    Mat u_, z_;
    Vec sigma_;
    Eigen::FullPivLU<Mat> cap_;
};

void validate(const Problem& p) {
    const Eigen::Index nx = p.c.size();
    if (p.G.cols() != nx || p.A.cols() != nx) throw InvalidDimension("conic: G and A need one column per variable");
    if (p.G.rows() != p.h.size() || p.A.rows() != p.b.size()) throw InvalidDimension("conic: rhs length mismatch");
    if (p.dims.total() != p.G.rows()) throw InvalidDimension("conic: cone sizes must add up to rows of G");
    for (auto q : p.dims.soc)
        if (q < 1) throw InvalidDimension("conic: second-order cones need dimension >= 1");
}

}  // namespace

Solution solve(const Problem& p, const Settings& st) {
    validate(p);
    const ConeDims& dims = p.dims;
    const Vec e = unit_e(dims);
    const double deg = double(dims.degree());
    const double resx0 = std::max(1.0, p.c.norm());
    const double resy0 = std::max(1.0, p.b.norm());
    const double resz0 = std::max(1.0, p.h.norm());

    Solution sol;
    KktSolver kkt(p);

    // Starting point: least-norm primal and dual solutions, shifted into the cone.
    Scaling w = identity_scaling(dims);
    if (!kkt.factor(w)) return sol;
    Vec x, y, z, s, dummy;
    kkt.solve(Vec::Zero(p.c.size()), p.b, p.h, x, dummy, z, st.refinement);
    s = -z;
    kkt.solve(-p.c, Vec::Zero(p.b.size()), Vec::Zero(p.h.size()), dummy, y, z, st.refinement);
    {
        const double ts = shift_to_interior(s, dims);
        if (ts >= -1e-8 * std::max(s.norm(), 1.0)) s += (1.0 + ts) * e;
        const double tz = shift_to_interior(z, dims);
        if (tz >= -1e-8 * std::max(z.norm(), 1.0)) z += (1.0 + tz) * e;
    }

    for (int it = 0; it <= st.max_iters; ++it) {
        const Vec rx = p.c + p.A.transpose() * y + p.G.transpose() * z;
        const Vec ry = p.A * x - p.b;
        const Vec rz = p.G * x + s - p.h;
        const double gap = s.dot(z);
        const double pcost = p.c.dot(x);
        const double dcost = pcost + y.dot(ry) + z.dot(rz) - gap;
        double relgap = std::numeric_limits<double>::quiet_NaN();
        if (pcost < 0.0) relgap = gap / -pcost;
        else if (dcost > 0.0) relgap = gap / dcost;
        const double pres = std::max(ry.norm() / resy0, rz.norm() / resz0);
        const double dres = rx.norm() / resx0;

        sol.x = x;
        sol.y = y;
        sol.z = z;
        sol.s = s;
        sol.iterations = it;
        sol.primal_objective = pcost;
        sol.dual_objective = dcost;
        sol.gap = gap;
        sol.relative_gap = relgap;
        sol.primal_residual = pres;
        sol.dual_residual = dres;

        if (!std::isfinite(gap) || !x.allFinite()) {
            sol.status = Status::numerical_error;
            return sol;
        }
        if (pres <= st.feastol && dres <= st.feastol && (gap <= st.abstol || (relgap == relgap && relgap <= st.reltol))) {
            sol.status = Status::optimal;
            return sol;
        }
        if (it == st.max_iters) break;

        w = detail::nt_scaling(s, z, dims);
        if (!kkt.factor(w)) {
            sol.status = Status::numerical_error;
            return sol;
        }
        const Vec lambda = detail::apply_w(w, z, dims, false);
        const Vec ll = detail::jordan_product(lambda, lambda, dims);
        const double mu = gap / deg;

        // Newton step for target complementarity rc: lambda o (W dz + W^{-1} ds) = rc.
        auto newton = [&](const Vec& rc, Vec& dx, Vec& dy, Vec& dz, Vec& ds) {
            const Vec t = detail::jordan_divide(lambda, rc, dims);
            const Vec wt = detail::apply_w(w, t, dims, false);
            kkt.solve(-rx, -ry, -rz - wt, dx, dy, dz, st.refinement);
            // ds = W t - W^2 dz.
            ds = detail::apply_w(w, Vec(t - detail::apply_w(w, dz, dims, false)), dims, false);
        };

        Vec dxa, dya, dza, dsa;
        newton(-ll, dxa, dya, dza, dsa);
        const double aa = std::min(1.0, std::min(detail::max_step(s, dsa, dims), detail::max_step(z, dza, dims)));
        const double sigma = std::pow(1.0 - aa, 3);

        const Vec dsa_s = detail::apply_w(w, dsa, dims, true);
        const Vec dza_s = detail::apply_w(w, dza, dims, false);
        const Vec rc = -ll - detail::jordan_product(dsa_s, dza_s, dims) + sigma * mu * e;
        Vec dx, dy, dz, ds;
        newton(rc, dx, dy, dz, ds);
        if (!dx.allFinite() || !dz.allFinite() || !ds.allFinite()) {
            sol.status = Status::numerical_error;
            return sol;
        }
        const double amax = std::min(detail::max_step(s, ds, dims), detail::max_step(z, dz, dims));
        const double alpha = std::min(1.0, 0.99 * amax);
        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
    }
    sol.status = Status::max_iterations;
    return sol;
}

}  // namespace odediscover::conic

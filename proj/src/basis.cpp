#include "odediscover/basis.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "odediscover/errors.hpp"
#include "odediscover/kernels.hpp"

namespace odediscover::basis {

namespace {

void compositions(int pos, int remaining, MultiIndex& cur, std::vector<MultiIndex>& out) {
    const int m = int(cur.size());
    if (pos == m - 1) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        cur[pos] = v;
        compositions(pos + 1, remaining - v, cur, out);
    }
}

double double_factorial(int n) {
    double r = 1.0;
    for (int k = n; k > 1; k -= 2) r *= double(k);
    return r;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return std::round(r);
}

struct Correction {
    Eigen::Index k;
    double weight;  // C_jk * M_{j\k}
};

// For each j, the lower indices k (strictly below in the partial order) whose
// noise moment is nonzero, together with the combined recursion weight.
std::vector<std::vector<Correction>> correction_table(const MonomialBasis& b, const Vec& sigma) {
    std::vector<std::vector<Correction>> table(b.indices.size());
    MultiIndex diff(b.m);
    for (std::size_t j = 0; j < b.indices.size(); ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            if (!strictly_below(b.indices[k], b.indices[j])) continue;
            for (int s = 0; s < b.m; ++s) diff[s] = b.indices[j][s] - b.indices[k][s];
            const double mom = gaussian_moment(diff, sigma);
            if (mom == 0.0) continue;
            table[j].push_back({Eigen::Index(k), multi_binomial(b.indices[j], b.indices[k]) * mom});
        }
    }
    return table;
}

Vec broadcast_sigma(double sigma, int m) {
    if (sigma < 0.0) throw InvalidArgument("noise std must be nonnegative");
    return Vec::Constant(m, sigma);
}

void check_sigma(const Vec& sigma, int m) {
    if (sigma.size() != m) throw InvalidDimension("sigma must have one entry per state");
    if ((sigma.array() < 0.0).any()) throw InvalidArgument("noise std must be nonnegative");
}

}  // namespace

MonomialBasis enumerate_basis(int m, int d) {
    if (m < 1) throw InvalidArgument("basis needs m >= 1");
    if (d < 0) throw InvalidArgument("basis needs d >= 0");
    MonomialBasis b;
    b.m = m;
    b.d = d;
    MultiIndex cur(m, 0);
    for (int deg = 0; deg <= d; ++deg) compositions(0, deg, cur, b.indices);
    return b;
}

int MonomialBasis::position(const MultiIndex& alpha) const {
    for (std::size_t j = 0; j < indices.size(); ++j)
        if (indices[j] == alpha) return int(j);
    return -1;
}

std::string MonomialBasis::term_name(std::size_t j) const {
    const MultiIndex& a = indices.at(j);
    std::ostringstream os;
    bool first = true;
    for (int k = 0; k < m; ++k) {
        if (a[k] == 0) continue;
        if (!first) os << '*';
        os << 'u' << (k + 1);
        if (a[k] > 1) os << '^' << a[k];
        first = false;
    }
    return first ? std::string("1") : os.str();
}

bool strictly_below(const MultiIndex& a, const MultiIndex& b) {
    bool differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] != b[i]) differ = true;
    }
    return differ;
}

double multi_binomial(const MultiIndex& b, const MultiIndex& a) {
    double r = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) r *= binomial(b[i], a[i]);
    return r;
}

double gaussian_moment(const MultiIndex& alpha, const Vec& sigma) {
    if (Eigen::Index(alpha.size()) != sigma.size())
        throw InvalidDimension("moment: sigma length must match multi-index");
    double r = 1.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        const int a = alpha[k];
        if (a < 0) throw InvalidArgument("moment: negative exponent");
        if (a == 0) continue;
        if (a % 2 == 1) return 0.0;
        r *= std::pow(sigma(Eigen::Index(k)), a) * double_factorial(a - 1);
    }
    return r;
}

double gaussian_moment(const MultiIndex& alpha, double sigma) {
    return gaussian_moment(alpha, Vec::Constant(Eigen::Index(alpha.size()), sigma));
}

Mat evaluate_library(const MonomialBasis& basis, const Mat& states) {
    if (states.cols() != basis.m)
        throw InvalidDimension("library: states have " + std::to_string(states.cols()) + " columns, basis expects " +
                               std::to_string(basis.m));
    return kernels::monomial_library_omp(basis.indices, basis.d, states);
}

Mat evaluate_library(const MonomialBasis& basis, const Trajectory& states) {
    return evaluate_library(basis, states.values);
}

Mat evaluate_unbiased_library(const MonomialBasis& basis, const Mat& noisy, const Vec& sigma) {
    check_sigma(sigma, basis.m);
    Mat theta = evaluate_library(basis, noisy);
    const auto table = correction_table(basis, sigma);
    // Basis order is a linear extension of the partial order, so every
    // column referenced below is already centered.
    for (std::size_t j = 0; j < table.size(); ++j)
        for (const Correction& c : table[j]) theta.col(Eigen::Index(j)) -= c.weight * theta.col(c.k);
    return theta;
}

Mat evaluate_unbiased_library(const MonomialBasis& basis, const Mat& noisy, double sigma) {
    return evaluate_unbiased_library(basis, noisy, broadcast_sigma(sigma, basis.m));
}

Mat gramian_tilde(const Mat& theta_tilde) { return theta_tilde.transpose() * theta_tilde; }

Mat gramian_consistent(const Mat& theta_tilde, const Mat& noisy, const MonomialBasis& basis, const Vec& sigma) {
    check_sigma(sigma, basis.m);
    if (theta_tilde.rows() != noisy.rows()) throw InvalidDimension("gramian: row mismatch");
    if (theta_tilde.cols() != basis.size()) throw InvalidDimension("gramian: theta_tilde must have p columns");
    const double n = double(noisy.rows());
    Mat h = theta_tilde.transpose() * evaluate_library(basis, noisy) / n;
    const auto table = correction_table(basis, sigma);
    for (std::size_t k = 0; k < table.size(); ++k)
        for (const Correction& c : table[k]) h.col(Eigen::Index(k)) -= c.weight * h.col(c.k);
    return n * h;
}

Mat gramian_consistent(const Mat& theta_tilde, const Mat& noisy, const MonomialBasis& basis, double sigma) {
    return gramian_consistent(theta_tilde, noisy, basis, broadcast_sigma(sigma, basis.m));
}

Mat integrated_library(const Mat& theta, const operators::TrapezoidMatrix& trap) {
    if (theta.rows() != trap.n()) throw InvalidDimension("integrated library: row mismatch");
    Mat phi(theta.rows(), theta.cols() + 1);
    phi.col(0).setOnes();
    phi.rightCols(theta.cols()) = kernels::cumulative_trapezoid_omp(theta, trap.dt());
    return phi;
}

LibraryMatrices build_library(const MonomialBasis& basis, const Trajectory& states, const Vec& sigma, bool centered) {
    validate_uniform_grid(states.times);
    LibraryMatrices lib;
    lib.sigma = sigma;
    lib.theta = evaluate_library(basis, states.values);
    const operators::TrapezoidMatrix trap = operators::build_trapezoid(states.n(), states.t_end());
    if (centered) {
        lib.theta_hat = evaluate_unbiased_library(basis, states.values, sigma);
        lib.phi = integrated_library(lib.theta_hat, trap);
    } else {
        lib.phi = integrated_library(lib.theta, trap);
    }
    return lib;
}

}  // namespace odediscover::basis

#pragma once

#include <vector>

#include "odediscover/types.hpp"

// Hot loops with an OpenMP variant and a serial reference. Both variants run
// the same arithmetic in the same order per output entry, so results agree
// bitwise; tests hold them to that.
namespace odediscover::kernels {

using Exponents = std::vector<std::vector<int>>;

/// Row-parallel monomial evaluation: out(i, j) = prod_k states(i, k)^exps[j][k].
Mat monomial_library_serial(const Exponents& exps, int max_degree, const Mat& states);
Mat monomial_library_omp(const Exponents& exps, int max_degree, const Mat& states);

/// Column-parallel cumulative trapezoid integration.
Mat cumulative_trapezoid_serial(const Mat& x, double dt);
Mat cumulative_trapezoid_omp(const Mat& x, double dt);

/// Thread count honoring ODEDISCOVER_THREADS (falls back to the OpenMP default).
int configured_threads();

}  // namespace odediscover::kernels

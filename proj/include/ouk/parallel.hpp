#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ouk {

/// Deterministic reduction: f(0) + f(1) + ... + f(n-1) with a result that does
/// not depend on the number of threads.
///
/// The index range is cut into fixed chunks of 64 terms. Chunks are evaluated
/// in parallel, each summed left to right, and the per-chunk partials are then
/// combined serially in chunk order. The floating-point result is therefore
/// bit-identical to chunked_sum_serial at any thread count.
template <typename F>
double chunked_sum(std::size_t n, F&& f) {
  constexpr std::size_t chunk = 64;
  const std::size_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(nchunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * chunk;
    const std::size_t hi = lo + chunk < n ? lo + chunk : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

/// Single-threaded reference with the same chunking and summation order.
template <typename F>
double chunked_sum_serial(std::size_t n, F&& f) {
  constexpr std::size_t chunk = 64;
  const std::size_t nchunks = (n + chunk - 1) / chunk;
  double total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = c * chunk;
    const std::size_t hi = lo + chunk < n ? lo + chunk : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    total += s;
  }
  return total;
}

}  // namespace ouk

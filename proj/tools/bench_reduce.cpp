// Benchmark of the deterministic parallel reduction against its serial
// reference, on a synthetic sum and on a real fractional-power workload.
// Exits nonzero if any parallel result is not bit-identical to the serial
// one.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ouk/fractional.hpp"
#include "ouk/kernel.hpp"
#include "ouk/parallel.hpp"
#include "ouk/system.hpp"

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool bits_equal(double a, double b) {
  std::uint64_t ua, ub;
  std::memcpy(&ua, &a, sizeof(ua));
  std::memcpy(&ub, &b, sizeof(ub));
  return ua == ub;
}

template <typename F>
double best_of(int reps, F&& run, double& result) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    result = run();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 1u << 24;
  if (argc > 1) n = std::stoull(argv[1]);
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads: %d\n", threads);

  int failures = 0;

  {
    auto term = [](std::size_t i) {
      const double x = static_cast<double>(i) * 1e-7;
      return std::cos(x) / (1.0 + x);
    };
    double serial = 0.0, parallel = 0.0;
    const double ts = best_of(
        3, [&] { return ouk::chunked_sum_serial(n, term); }, serial);
    const double tp =
        best_of(3, [&] { return ouk::chunked_sum(n, term); }, parallel);
    std::printf("synthetic sum, n = %zu\n", n);
    std::printf("  serial   %.4f s\n", ts);
    std::printf("  parallel %.4f s  (speedup %.2fx)\n", tp, ts / tp);
    std::printf("  bitwise equal: %s\n", bits_equal(serial, parallel) ? "yes" : "NO");
    if (!bits_equal(serial, parallel)) ++failures;
  }

  {
    const ouk::OUSystem sys = ouk::make_system("heat:1");
    const ouk::GaussianExpFn f = ouk::unit_gaussian(1);
    std::vector<ouk::Vector> pts;
    for (double x : {0.0, 0.5, 1.5}) {
      ouk::Vector v(1);
      v(0) = x;
      pts.push_back(v);
    }
    auto run = [&] {
      const std::vector<double> got =
          ouk::fracpower_compose(sys, 0.5, 0.5, f, pts);
      double acc = 0.0;
      for (double v : got) acc += v;
      return acc;
    };
    double serial = 0.0, parallel = 0.0;
    double ts = 0.0, tp = 0.0;
#ifdef _OPENMP
    omp_set_num_threads(1);
    ts = best_of(2, run, serial);
    omp_set_num_threads(threads);
    tp = best_of(2, run, parallel);
#else
    ts = best_of(2, run, serial);
    tp = best_of(2, run, parallel);
#endif
    std::printf("fractional power composition, heat:1, 3 points\n");
    std::printf("  serial   %.4f s\n", ts);
    std::printf("  parallel %.4f s  (%d thread%s, speedup %.2fx)\n", tp,
                threads, threads == 1 ? "" : "s", ts / tp);
    std::printf("  bitwise equal: %s\n",
                bits_equal(serial, parallel) ? "yes" : "NO");
    if (!bits_equal(serial, parallel)) ++failures;
  }

  return failures == 0 ? 0 : 1;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "ouk/parallel.hpp"
#include "ouk/quadrature.hpp"
#include "ouk/types.hpp"

using namespace ouk;

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  const Quad1D gl = gauss_legendre_1d(8);
  REQUIRE(gl.nodes.size() == 8);
  double w_sum = 0.0, x2 = 0.0, x7 = 0.0, x14 = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = gl.nodes(i), w = gl.weights(i);
    w_sum += w;
    x2 += w * x * x;
    x7 += w * std::pow(x, 7);
    x14 += w * std::pow(x, 14);
  }
  CHECK(w_sum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(x7) <= 1e-14);
  // degree 14 is still below 2*8-1 = 15, so exact
  CHECK(x14 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("Gauss-Hermite rule reproduces Gaussian moments") {
  const Quad1D gh = gauss_hermite_1d(20);
  double w_sum = 0.0, x2 = 0.0;
  for (int i = 0; i < 20; ++i) {
    w_sum += gh.weights(i);
    x2 += gh.weights(i) * gh.nodes(i) * gh.nodes(i);
  }
  const double sqrt_pi = std::sqrt(M_PI);
  CHECK(w_sum == doctest::Approx(sqrt_pi).epsilon(1e-13));
  CHECK(x2 == doctest::Approx(0.5 * sqrt_pi).epsilon(1e-13));
}

TEST_CASE("tensor Gauss-Hermite covers the plane and refuses high dimension") {
  const TensorRule& r = gauss_hermite(2, 12);
  REQUIRE(r.nodes.rows() == 144);
  double w_sum = 0.0, r2 = 0.0;
  for (int i = 0; i < 144; ++i) {
    w_sum += r.weights(i);
    r2 += r.weights(i) * r.nodes.row(i).squaredNorm();
  }
  CHECK(w_sum == doctest::Approx(M_PI).epsilon(1e-13));
  CHECK(r2 == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK_THROWS_AS(gauss_hermite(5, 8), GuardError);
}

TEST_CASE("semi-infinite integral of a plain exponential") {
  const QuadSpec spec;
  const QuadResult r =
      quad_semiinf([](double t) { return std::exp(-t); }, spec, 0.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("semi-infinite integral with an integrable endpoint singularity") {
  const QuadSpec spec;
  const QuadResult r = quad_semiinf(
      [](double t) { return std::exp(-t) / std::sqrt(t); }, spec, -0.5);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));

  const QuadResult g = quad_semiinf(
      [](double t) { return std::pow(t, 0.3) * std::exp(-2.0 * t); }, spec,
      0.3);
  const double want = std::tgamma(1.3) / std::pow(2.0, 1.3);
  CHECK(g.value == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("semi-infinite integral of a damped oscillation") {
  const QuadSpec spec;
  const QuadResult r = quad_semiinf(
      [](double t) { return std::exp(-t) * std::cos(t); }, spec, 0.0);
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("frozen rules are deterministic and match the adaptive value") {
  const QuadSpec spec;
  const auto g = [](double t) { return t * std::exp(-t); };
  const SemiInfRule r1 = semiinf_rule(g, spec, 1.0);
  const SemiInfRule r2 = semiinf_rule(g, spec, 1.0);
  REQUIRE(r1.t.size() == r2.t.size());
  for (std::size_t i = 0; i < r1.t.size(); ++i) {
    CHECK(r1.t[i] == r2.t[i]);
    CHECK(r1.w[i] == r2.w[i]);
  }
  const double applied = semiinf_apply(r1, g);
  const QuadResult direct = quad_semiinf(g, spec, 1.0);
  CHECK(applied == direct.value);
  CHECK(applied == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("chunked reduction is bit-identical between parallel and serial") {
  const auto term = [](std::size_t i) {
    const double x = 0.001 * static_cast<double>(i);
    return std::cos(x) / (1.0 + x);
  };
  const std::size_t n = 100000;
  CHECK(chunked_sum(n, term) == chunked_sum_serial(n, term));
}

TEST_CASE("log grid endpoints and monotonicity") {
  const std::vector<double> g = log_grid(1e-3, 1e3, 7);
  REQUIRE(g.size() == 7);
  CHECK(g.front() == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(g.back() == doctest::Approx(1e3).epsilon(1e-12));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK(g[3] == doctest::Approx(1.0).epsilon(1e-12));
}

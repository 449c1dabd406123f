#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ouk/kernel.hpp"
#include "ouk/rng.hpp"
#include "ouk/system.hpp"
#include "ouk/types.hpp"
#include "oracles.hpp"

using namespace ouk;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

}  // namespace

TEST_CASE("time-averaged covariance of kinetic transport in closed form") {
  const OUSystem sys = make_system("kolmogorov:1");
  for (double t : {0.1, 1.0, 10.0}) {
    const CovarianceEval ce = covariance_eval(sys, t);
    Matrix want(2, 2);
    want << 1.0, 0.5 * t, 0.5 * t, t * t / 3.0;
    CHECK((ce.K - want).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + t * t));
    CHECK((ce.G - t * want).cwiseAbs().maxCoeff() <= 1e-11 * (1.0 + t * t * t));
  }
}

TEST_CASE("free diffusion kernel at the origin") {
  const OUSystem sys = make_system("heat:1");
  const double got = kernel_eval(sys, 1.0, vec1(0.0), vec1(0.0));
  CHECK(got == doctest::Approx(oracle::heat1_kernel_origin_t1()).epsilon(1e-14));
}

TEST_CASE("free diffusion kernel matches the explicit Gaussian in the plane") {
  const OUSystem sys = make_system("heat:2");
  Rng rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const Vector X = rng.uniform_vec(2, -2.0, 2.0);
    const Vector Y = rng.uniform_vec(2, -2.0, 2.0);
    const double t = rng.uniform(0.2, 3.0);
    const double want =
        std::exp(-(X - Y).squaredNorm() / (4.0 * t)) / (4.0 * M_PI * t);
    CHECK(kernel_eval(sys, t, X, Y) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("pseudo distance reduces to the Euclidean one for free diffusion") {
  const OUSystem sys = make_system("heat:2");
  Vector X(2), Y(2);
  X << 1.0, -0.5;
  Y << -0.3, 0.7;
  CHECK(pseudo_distance(sys, 1.7, X, Y) ==
        doctest::Approx((X - Y).norm()).epsilon(1e-12));
}

TEST_CASE("Gaussian image of the semigroup matches the hand formula") {
  const OUSystem sys = make_system("heat:1");
  const GaussianExpFn f = unit_gaussian(1);
  Rng rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const double t = rng.uniform(0.05, 4.0);
    const double x = rng.uniform(-3.0, 3.0);
    const GaussianExpFn ptf = semigroup_apply_gaussian(sys, t, f);
    const double want = oracle::heat1_semigroup_unit_gauss(t, x);
    CHECK(ptf(vec1(x)) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("quadrature semigroup agrees with the closed-form image") {
  const OUSystem sys = make_system("kolmogorov:1");
  const GaussianExpFn f = unit_gaussian(2);
  const ScalarField field = [&f](const Vector& Y) { return f(Y); };
  Vector X(2);
  X << 0.4, -0.8;
  // The tensor rule is centered on the kernel Gaussian, so its accuracy
  // decays as the kernel becomes much wider than f.
  for (const auto& [t, tol] : std::vector<std::pair<double, double>>{
           {0.3, 1e-12}, {1.5, 1e-6}}) {
    const double closed = semigroup_apply_gaussian(sys, t, f)(X);
    const double quad = semigroup_apply(sys, t, field, X);
    CHECK(quad == doctest::Approx(closed).epsilon(tol));
  }
}

TEST_CASE("semigroup average over a time window in closed form") {
  const OUSystem sys = make_system("heat:1");
  const double got = cesaro_average(sys, 1.0, unit_gaussian(1), vec1(0.0));
  CHECK(got == doctest::Approx(oracle::cesaro_heat1_t1()).epsilon(1e-10));
}

TEST_CASE("kernel mass and dual mass") {
  const OUSystem kol = make_system("kolmogorov:1");
  Vector X(2);
  X << 0.7, -0.2;
  CHECK(kernel_mass(kol, 0.5, X) == doctest::Approx(1.0).epsilon(1e-10));

  const OUSystem ou = make_system("ou:2");
  CHECK(kernel_dual_mass(ou, 1.0, X) ==
        doctest::Approx(std::exp(2.0)).epsilon(1e-8));

  const OUSystem fk = make_system("friction-kolmogorov:1");
  CHECK(kernel_dual_mass(fk, 1.0, X) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("two-step composition reproduces the one-step kernel") {
  const OUSystem sys = make_system("heat:1");
  const Vector X = vec1(0.3), Y = vec1(-0.9);
  const double lhs = chapman_kolmogorov_lhs(sys, 0.3, 0.4, X, Y);
  const double rhs = kernel_eval(sys, 0.7, X, Y);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("kernel power integral matches its analytic value") {
  const OUSystem sys = make_system("heat:2");
  const double t = 1.0, r = 2.0;
  Vector X(2);
  X << 0.1, 0.2;
  const CovarianceEval ce = covariance_eval(sys, t);
  const double want = std::pow(4.0 * M_PI, (1.0 - r) * sys.dim / 2.0) *
                      std::pow(r, -0.5 * sys.dim) *
                      std::pow(ce.G.determinant(), 0.5 * (1.0 - r));
  CHECK(kernel_power_integral(sys, t, X, r) ==
        doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("closed-form Gaussian integrals") {
  const GaussianExpFn f = unit_gaussian(2);
  CHECK(gaussian_mass(f) == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
  const GaussianExpFn g = unit_gaussian(1);
  CHECK(gaussian_lp_norm(g, 2.0) ==
        doctest::Approx(std::pow(M_PI, 0.25)).epsilon(1e-13));
  CHECK(gaussian_lp_norm(g, 1.0) ==
        doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-13));
}

TEST_CASE("volume of the flat ball and the model ball") {
  CHECK(omega_ball(2) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(omega_ball(3) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-14));
  const OUSystem sys = make_system("heat:2");
  // V(t) = omega_2 * det(tI)^{1/2} = pi * t
  CHECK(std::exp(log_volume(sys, 2.5)) ==
        doctest::Approx(M_PI * 2.5).epsilon(1e-12));
}

TEST_CASE("kernel evaluation refuses a non-controllable system") {
  Matrix Q = Matrix::Zero(2, 2);
  Q(0, 0) = 1.0;
  const OUSystem sys = validate("stuck", 2, Q, Matrix::Identity(2, 2));
  Vector X(2);
  X << 0.0, 0.0;
  CHECK_THROWS_AS(kernel_eval(sys, 1.0, X, X), GuardError);
}

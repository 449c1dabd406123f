#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "ouk/numerics.hpp"
#include "ouk/rng.hpp"
#include "ouk/system.hpp"
#include "ouk/types.hpp"
#include "oracles.hpp"

using namespace ouk;

TEST_CASE("matrix exponential matches a scaled Taylor reference") {
  Rng rng(123);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 3;
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.5, 1.5);
    for (double t : {0.1, 1.0, 3.0}) {
      const Matrix got = mat_exp(A, t);
      const Matrix want = oracle::mat_exp_taylor(A, t);
      CHECK((got - want).norm() <= 1e-12 * want.norm());
    }
  }
}

TEST_CASE("matrix exponential of a nilpotent block terminates exactly") {
  const OUSystem sys = make_system("kolmogorov:1");
  const double t = 2.5;
  Matrix want(2, 2);
  want << 1.0, 0.0, t, 1.0;
  CHECK((mat_exp(sys.B, t) - want).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("matrix exponential satisfies the group law") {
  const OUSystem sys = make_system("kramers");
  const Matrix a = mat_exp(sys.B, 0.7);
  const Matrix b = mat_exp(sys.B, 1.3);
  const Matrix c = mat_exp(sys.B, 2.0);
  CHECK((a * b - c).norm() <= 1e-13 * c.norm());
}

TEST_CASE("covariance integral of the kinetic transport model in closed form") {
  const OUSystem sys = make_system("kolmogorov:1");
  for (double t : {0.3, 1.0, 4.0}) {
    Matrix want(2, 2);
    want << t, t * t / 2.0, t * t / 2.0, t * t * t / 3.0;
    const Matrix got = gramian(sys.Q, sys.B, t);
    CHECK((got - want).norm() <= 1e-13 * want.norm());
  }
}

TEST_CASE("block-exponential covariance agrees with direct quadrature") {
  for (const char* key : {"ou:2", "kramers", "degenerate-ou:1", "smoluchowski"}) {
    const OUSystem sys = make_system(key);
    for (double t : {0.5, 2.0}) {
      const Matrix a = gramian(sys.Q, sys.B, t);
      const Matrix b = gramian_quad(sys.Q, sys.B, t);
      CHECK((a - b).norm() <= 1e-9 * (a.norm() + 1e-30));
    }
  }
}

TEST_CASE("covariance integral rejects bad times and overflow") {
  const OUSystem sys = make_system("friction-kolmogorov:1");
  CHECK_THROWS_AS(gramian(sys.Q, sys.B, 0.0), InvalidInput);
  CHECK_THROWS_AS(gramian(sys.Q, sys.B, -1.0), InvalidInput);
  CHECK_THROWS_AS(gramian(sys.Q, sys.B, 400.0), std::overflow_error);
}

TEST_CASE("symmetric factorization reproduces rank-deficient matrices") {
  Matrix S(2, 2);
  S << 1.0, 0.0, 0.0, 0.0;
  Matrix L = sym_factor(S);
  CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::Rotation2D<double> rot(0.6);
  const Matrix R = rot.toRotationMatrix();
  S = R * S * R.transpose();
  L = sym_factor(S);
  CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("spectrum of the rotation block is purely imaginary") {
  const OUSystem sys = make_system("kramers");
  const Spectrum sp = spectrum(sys.B);
  REQUIRE(sp.eigenvalues.size() == 2);
  CHECK(std::abs(sp.max_real_part()) <= 1e-12);
  double max_imag = 0.0;
  for (const auto& ev : sp.eigenvalues)
    max_imag = std::max(max_imag, std::abs(ev.imag()));
  CHECK(max_imag == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log-determinant of a positive matrix") {
  Rng rng(7);
  Matrix A(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
  const Matrix S = A * A.transpose() + Matrix::Identity(3, 3);
  const double want = std::log(S.determinant());
  CHECK(log_det_spd(S) == doctest::Approx(want).epsilon(1e-12));
}

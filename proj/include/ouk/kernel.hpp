#pragma once

#include <cmath>
#include <functional>

#include "ouk/system.hpp"
#include "ouk/types.hpp"

namespace ouk {

/// Everything the kernel at time t needs: G = tK(t), its Cholesky factor,
/// log det, e^{tB}, and the volume V(t) = omega_N det(tK)^{1/2}.
struct CovarianceEval {
  double t = 0.0;
  Matrix G;        // t * K(t)
  Matrix K;        // G / t
  Matrix L;        // lower triangular, L L^T = G
  Matrix expB;     // e^{tB}
  double log_det_G = 0.0;
  double V = 0.0;
};

/// Volume of the unit ball in R^n.
double omega_ball(int n);

CovarianceEval covariance_eval(const OUSystem& sys, double t);

/// log V(t); throws std::overflow_error outside the representable range.
double log_volume(const OUSystem& sys, double t);

/// Kernel-adapted distance m_t(X,Y) = sqrt(<K(t)^{-1} d, d>), d = Y - e^{tB}X.
double pseudo_distance(const OUSystem& sys, double t, const Vector& X,
                       const Vector& Y);

/// omega_N r^N det(K(t))^{1/2}.
double ball_volume(const OUSystem& sys, double t, double r);

/// p(X, Y, t) = (4 pi)^{-N/2} det(tK)^{-1/2} exp(-m_t(X,Y)^2 / 4t).
double kernel_eval(const OUSystem& sys, double t, const Vector& X,
                   const Vector& Y);

/// exp(-1/2 Y^T M Y + b.Y + c) with M symmetric positive definite. The family
/// is closed under the semigroup, which is what makes it the reference class
/// for every quadrature result here.
struct GaussianExpFn {
  Matrix M;
  Vector b;
  double c = 0.0;

  double log_value(const Vector& Y) const {
    return -0.5 * Y.dot(M * Y) + b.dot(Y) + c;
  }
  double operator()(const Vector& Y) const { return std::exp(log_value(Y)); }
};

GaussianExpFn unit_gaussian(int dim);

using ScalarField = std::function<double(const Vector&)>;

/// P_t f(X) by Gauss-Hermite quadrature through Y = e^{tB}X + sqrt(2) L xi,
/// L L^T = 2tK(t). Dimension is capped at 4 by the tensor rule.
double semigroup_apply(const OUSystem& sys, double t, const ScalarField& f,
                       const Vector& X, const QuadSpec& spec = {});

/// Closed-form image of a Gaussian-exponential under P_t.
GaussianExpFn semigroup_apply_gaussian(const OUSystem& sys, double t,
                                       const GaussianExpFn& f);

/// Core of the closed form: the image of f under integration against the
/// Gaussian with mean EX and covariance S.
GaussianExpFn gaussian_transform(const Matrix& E, const Matrix& S,
                                 const GaussianExpFn& f);

/// (1/t) integral of P_s f(X) over [0,t], Gauss-Legendre in s.
double cesaro_average(const OUSystem& sys, double t, const GaussianExpFn& f,
                      const Vector& X, const QuadSpec& spec = {});
double cesaro_average(const OUSystem& sys, double t, const ScalarField& f,
                      const Vector& X, const QuadSpec& spec = {});

/// integral of p(X,.,t), evaluated through kernel_eval so normalization and
/// exponent are actually exercised; exactly 1 up to quadrature error.
double kernel_mass(const OUSystem& sys, double t, const Vector& X,
                   const QuadSpec& spec = {});

/// integral of p(.,Y,t) dX = e^{-t tr B}, via the substitution
/// X = e^{-tB}(Y - sqrt(2) L xi).
double kernel_dual_mass(const OUSystem& sys, double t, const Vector& Y,
                        const QuadSpec& spec = {});

/// integral over Z of p(X,Z,s) p(Z,Y,t): must reproduce p(X,Y,s+t).
double chapman_kolmogorov_lhs(const OUSystem& sys, double s, double t,
                              const Vector& X, const Vector& Y,
                              const QuadSpec& spec = {});

/// integral of p(X,.,t)^r, by quadrature; analytic value is
/// (4pi)^{(1-r)N/2} r^{-N/2} det(tK)^{(1-r)/2}.
double kernel_power_integral(const OUSystem& sys, double t, const Vector& X,
                             double r, const QuadSpec& spec = {});

/// Closed-form integral of f over R^N.
double gaussian_mass(const GaussianExpFn& f);

/// Closed-form L^p norm of f (f is positive, so this is a Gaussian integral).
double gaussian_lp_norm(const GaussianExpFn& f, double p);

}  // namespace ouk

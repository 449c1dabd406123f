#include "ouk/kernel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

#include "ouk/numerics.hpp"
#include "ouk/parallel.hpp"
#include "ouk/quadrature.hpp"

namespace ouk {

namespace {

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw InvalidInput("time must be positive and finite");
}

void ensure_hypoelliptic(const OUSystem& sys) {
  auto [ok, rank] = kalman_check(sys);
  if (!ok)
    throw GuardError("system '" + sys.name +
                     "' is not hypoelliptic: controllability rank " +
                     std::to_string(rank) + " < " + std::to_string(sys.dim));
}

CovarianceEval cov_at(const OUSystem& sys, double t) {
  CovarianceEval cov;
  cov.t = t;
  cov.G = gramian(sys.Q, sys.B, t);
  cov.K = cov.G / t;
  Eigen::LLT<Matrix> llt(cov.G);
  if (llt.info() != Eigen::Success)
    throw GuardError("covariance is numerically singular at t = " +
                     std::to_string(t));
  cov.L = llt.matrixL();
  cov.expB = mat_exp(sys.B, t);
  cov.log_det_G = 2.0 * cov.L.diagonal().array().log().sum();
  cov.V = omega_ball(sys.dim) * std::exp(0.5 * cov.log_det_G);
  return cov;
}

double kernel_eval_cov(const CovarianceEval& cov, const Vector& X,
                       const Vector& Y) {
  const int n = static_cast<int>(X.size());
  const Vector d = Y - cov.expB * X;
  const Vector w = cov.L.template triangularView<Eigen::Lower>().solve(d);
  const double q = w.squaredNorm();  // <G^{-1} d, d>
  const double log_p = -0.5 * n * std::log(4.0 * M_PI) -
                       0.5 * cov.log_det_G - 0.25 * q;
  return std::exp(log_p);
}

int order_for(const QuadSpec& spec, int dim) {
  return spec.gh_order_for_dim(dim);
}

}  // namespace

double omega_ball(int n) {
  if (n < 1) throw InvalidInput("omega_ball: dimension must be >= 1");
  return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

CovarianceEval covariance_eval(const OUSystem& sys, double t) {
  require_time(t);
  ensure_hypoelliptic(sys);
  return cov_at(sys, t);
}

double log_volume(const OUSystem& sys, double t) {
  require_time(t);
  ensure_hypoelliptic(sys);
  const Matrix G = gramian(sys.Q, sys.B, t);
  return std::log(omega_ball(sys.dim)) + 0.5 * log_det_spd(G);
}

double pseudo_distance(const OUSystem& sys, double t, const Vector& X,
                       const Vector& Y) {
  const CovarianceEval cov = covariance_eval(sys, t);
  const Vector d = Y - cov.expB * X;
  const Vector w = cov.L.template triangularView<Eigen::Lower>().solve(d);
  return std::sqrt(t * w.squaredNorm());
}

double ball_volume(const OUSystem& sys, double t, double r) {
  if (!(r >= 0.0)) throw InvalidInput("ball_volume: radius must be >= 0");
  const CovarianceEval cov = covariance_eval(sys, t);
  const double log_det_K = cov.log_det_G - sys.dim * std::log(t);
  return omega_ball(sys.dim) * std::pow(r, sys.dim) *
         std::exp(0.5 * log_det_K);
}

double kernel_eval(const OUSystem& sys, double t, const Vector& X,
                   const Vector& Y) {
  return kernel_eval_cov(covariance_eval(sys, t), X, Y);
}

GaussianExpFn unit_gaussian(int dim) {
  GaussianExpFn f;
  f.M = Matrix::Identity(dim, dim);
  f.b = Vector::Zero(dim);
  f.c = 0.0;
  return f;
}

double semigroup_apply(const OUSystem& sys, double t, const ScalarField& f,
                       const Vector& X, const QuadSpec& spec) {
  spec.check();
  if (t == 0.0) return f(X);
  const CovarianceEval cov = covariance_eval(sys, t);
  const TensorRule& rule = gauss_hermite(sys.dim, order_for(spec, sys.dim));
  const Vector mu = cov.expB * X;
  // Y = mu + 2 L xi maps the Gauss-Hermite weight onto the transition
  // density with covariance 2G.
  const Matrix A = 2.0 * cov.L;
  const double sum = chunked_sum(rule.weights.size(), [&](std::size_t i) {
    const Vector xi = rule.nodes.row(static_cast<Eigen::Index>(i)).transpose();
    return rule.weights[i] * f(mu + A * xi);
  });
  return sum * std::pow(M_PI, -0.5 * sys.dim);
}

GaussianExpFn gaussian_transform(const Matrix& E, const Matrix& S,
                                 const GaussianExpFn& f) {
  const int n = static_cast<int>(E.rows());
  const Matrix I = Matrix::Identity(n, n);
  Eigen::PartialPivLU<Matrix> lu1(I + S * f.M);
  Eigen::PartialPivLU<Matrix> lu2(I + f.M * S);

  GaussianExpFn g;
  const Matrix WE = lu1.solve(E);
  g.M = E.transpose() * (f.M * WE);
  g.M = 0.5 * (g.M + g.M.transpose()).eval();
  g.b = E.transpose() * lu2.solve(f.b);

  // log det(I + SM) from the LU factors; the determinant is positive
  // because SM has the spectrum of sqrt(S) M sqrt(S) >= 0.
  double log_det = 0.0;
  double sign = lu1.permutationP().determinant() > 0 ? 1.0 : -1.0;
  const auto& U = lu1.matrixLU();
  for (int i = 0; i < n; ++i) {
    const double u = U(i, i);
    if (u < 0.0) sign = -sign;
    log_det += std::log(std::abs(u));
  }
  if (!(sign > 0.0))
    throw std::overflow_error("gaussian_transform: lost positivity of "
                              "det(I + SM)");
  g.c = f.c + 0.5 * f.b.dot(lu1.solve(S * f.b)) - 0.5 * log_det;

  if (!g.M.allFinite() || !g.b.allFinite() || !std::isfinite(g.c))
    throw std::overflow_error("gaussian_transform: non-finite result");
  return g;
}

GaussianExpFn semigroup_apply_gaussian(const OUSystem& sys, double t,
                                       const GaussianExpFn& f) {
  if (t == 0.0) return f;
  require_time(t);
  const Matrix E = mat_exp(sys.B, t);
  const Matrix S = 2.0 * gramian(sys.Q, sys.B, t);
  return gaussian_transform(E, S, f);
}

double cesaro_average(const OUSystem& sys, double t, const GaussianExpFn& f,
                      const Vector& X, const QuadSpec& spec) {
  spec.check();
  require_time(t);
  const Quad1D gl = gauss_legendre_1d(spec.cesaro_order);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) {
    const double s = 0.5 * t * (gl.nodes[j] + 1.0);
    sum += gl.weights[j] * semigroup_apply_gaussian(sys, s, f)(X);
  }
  return 0.5 * sum;
}

double cesaro_average(const OUSystem& sys, double t, const ScalarField& f,
                      const Vector& X, const QuadSpec& spec) {
  spec.check();
  require_time(t);
  const Quad1D gl = gauss_legendre_1d(spec.cesaro_order);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) {
    const double s = 0.5 * t * (gl.nodes[j] + 1.0);
    sum += gl.weights[j] * semigroup_apply(sys, s, f, X, spec);
  }
  return 0.5 * sum;
}

double kernel_mass(const OUSystem& sys, double t, const Vector& X,
                   const QuadSpec& spec) {
  spec.check();
  const CovarianceEval cov = covariance_eval(sys, t);
  const TensorRule& rule = gauss_hermite(sys.dim, order_for(spec, sys.dim));
  const Vector mu = cov.expB * X;
  const Matrix A = 2.0 * cov.L;
  const double jac = std::exp(sys.dim * std::log(2.0) + 0.5 * cov.log_det_G);
  const double sum = chunked_sum(rule.weights.size(), [&](std::size_t i) {
    const Vector xi = rule.nodes.row(static_cast<Eigen::Index>(i)).transpose();
    const double p = kernel_eval_cov(cov, X, mu + A * xi);
    return rule.weights[i] * p * std::exp(xi.squaredNorm());
  });
  return jac * sum;
}

double kernel_dual_mass(const OUSystem& sys, double t, const Vector& Y,
                        const QuadSpec& spec) {
  spec.check();
  const CovarianceEval cov = covariance_eval(sys, t);
  const TensorRule& rule = gauss_hermite(sys.dim, order_for(spec, sys.dim));
  const Matrix Einv = mat_exp(sys.B, -t);
  const Matrix A = 2.0 * cov.L;
  const double trB = sys.B.trace();
  const double jac = std::exp(-t * trB + sys.dim * std::log(2.0) +
                              0.5 * cov.log_det_G);
  const double sum = chunked_sum(rule.weights.size(), [&](std::size_t i) {
    const Vector xi = rule.nodes.row(static_cast<Eigen::Index>(i)).transpose();
    const Vector Xi = Einv * (Y - A * xi);
    const double p = kernel_eval_cov(cov, Xi, Y);
    return rule.weights[i] * p * std::exp(xi.squaredNorm());
  });
  return jac * sum;
}

double chapman_kolmogorov_lhs(const OUSystem& sys, double s, double t,
                              const Vector& X, const Vector& Y,
                              const QuadSpec& spec) {
  spec.check();
  const Eigen::Index d = sys.dim;
  const CovarianceEval cov_s = covariance_eval(sys, s);
  const CovarianceEval cov_t = covariance_eval(sys, t);
  const TensorRule& rule = gauss_hermite(sys.dim, order_for(spec, sys.dim));
  // The two kernel factors multiply to a Gaussian in the intermediate state.
  // Centering the rule on that product instead of on the first factor keeps
  // the compensated integrand flat, so the accuracy does not degrade when
  // the factors sit far apart relative to their widths.
  const Vector mu = cov_s.expB * X;
  const Matrix& E = cov_t.expB;
  auto spd_inverse = [d](const Matrix& L) {
    Matrix inv = Matrix::Identity(d, d);
    L.triangularView<Eigen::Lower>().solveInPlace(inv);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
    return inv;
  };
  const Matrix Gs_inv = spd_inverse(cov_s.L);
  const Matrix Gt_inv = spd_inverse(cov_t.L);
  Matrix H = 0.5 * (Gs_inv + E.transpose() * Gt_inv * E);
  H = 0.5 * (H + H.transpose());
  const Vector rhs = 0.5 * (Gs_inv * mu + E.transpose() * (Gt_inv * Y));
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success)
    throw GuardError("product covariance is not positive definite");
  const Vector center = llt.solve(rhs);
  const Matrix Lh = llt.matrixL();
  const double log_jac = 0.5 * d * std::log(2.0) -
                         Lh.diagonal().array().log().sum();
  const double sum = chunked_sum(rule.weights.size(), [&](std::size_t i) {
    Vector xi = rule.nodes.row(static_cast<Eigen::Index>(i)).transpose();
    const double xi2 = xi.squaredNorm();
    xi *= std::sqrt(2.0);
    Lh.transpose().triangularView<Eigen::Upper>().solveInPlace(xi);
    const Vector Z = center + xi;
    const double p = kernel_eval_cov(cov_s, X, Z) * kernel_eval_cov(cov_t, Z, Y);
    return rule.weights[i] * p * std::exp(xi2);
  });
  return sum * std::exp(log_jac);
}

double kernel_power_integral(const OUSystem& sys, double t, const Vector& X,
                             double r, const QuadSpec& spec) {
  spec.check();
  if (!(r > 0.0)) throw InvalidInput("kernel_power_integral: r must be > 0");
  const CovarianceEval cov = covariance_eval(sys, t);
  const TensorRule& rule = gauss_hermite(sys.dim, order_for(spec, sys.dim));
  const Vector mu = cov.expB * X;
  const Matrix A = 2.0 * cov.L;
  const double jac = std::exp(sys.dim * std::log(2.0) + 0.5 * cov.log_det_G);
  const double sum = chunked_sum(rule.weights.size(), [&](std::size_t i) {
    const Vector xi = rule.nodes.row(static_cast<Eigen::Index>(i)).transpose();
    const double p = kernel_eval_cov(cov, X, mu + A * xi);
    return rule.weights[i] * std::pow(p, r) * std::exp(xi.squaredNorm());
  });
  return jac * sum;
}

double gaussian_mass(const GaussianExpFn& f) {
  const int n = static_cast<int>(f.M.rows());
  Eigen::LLT<Matrix> llt(f.M);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("gaussian_mass: quadratic part must be positive "
                       "definite");
  const Matrix L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double quad = 0.5 * f.b.dot(llt.solve(f.b));
  return std::exp(0.5 * n * std::log(2.0 * M_PI) - 0.5 * log_det + f.c +
                  quad);
}

double gaussian_lp_norm(const GaussianExpFn& f, double p) {
  if (!(p > 0.0)) throw InvalidInput("gaussian_lp_norm: p must be > 0");
  const int n = static_cast<int>(f.M.rows());
  Eigen::LLT<Matrix> llt(f.M);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("gaussian_lp_norm: quadratic part must be positive "
                       "definite");
  const Matrix L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double quad = 0.5 * f.b.dot(llt.solve(f.b));
  const double log_norm =
      (0.5 * n / p) * std::log(2.0 * M_PI / p) - (0.5 / p) * log_det + f.c +
      quad;
  return std::exp(log_norm);
}

}  // namespace ouk

#pragma once

#include <functional>

#include "ouk/types.hpp"

namespace ouk {

/// One-dimensional rule: integral of f(x) d(mu) ~ sum_i weights[i] f(nodes[i]).
struct Quad1D {
  Vector nodes;
  Vector weights;
};

/// Gauss-Hermite rule for weight e^{-x^2} on the real line (Golub-Welsch).
Quad1D gauss_hermite_1d(int order);

/// Gauss-Legendre rule on (-1, 1).
Quad1D gauss_legendre_1d(int order);

/// Tensorized Gauss-Hermite rule for e^{-|xi|^2} on R^dim; nodes has
/// order^dim rows. Dimensions above 4 are refused (GuardError): the tensor
/// grid is the wrong tool there.
struct TensorRule {
  int dim = 0;
  int order = 0;
  Matrix nodes;
  Vector weights;
};

const TensorRule& gauss_hermite(int dim, int order);

/// Node/weight table for a semi-infinite time integral, frozen so the same
/// discretization can be reused across nearby integrands (finite-difference
/// stencils, evaluation-point sweeps).
struct SemiInfRule {
  std::vector<double> t;
  std::vector<double> w;
  bool converged = true;
  double rel_err_est = 0.0;
  int refinements = 0;
};

/// Build a rule for integral_0^inf g(t) dt from a probe integrand.
///
/// The integral is mapped to u = log t and covered by Gauss-Legendre panels of
/// width <= 2 aligned to spec.split_points. The window grows outward while the
/// outermost panel still contributes more than max(abs_tol, rel_tol*|total|)/10,
/// capped at [u_lo_cap, u_hi_cap]; panels are then halved until two successive
/// totals agree to rel_tol or max_refinements is hit. endpoint_exponent is the
/// declared power of the t->0 singularity: a non-integrable declared power
/// widens the initial window (the actual integrand is expected to supply the
/// missing decay).
SemiInfRule semiinf_rule(const std::function<double(double)>& probe,
                         const QuadSpec& spec, double endpoint_exponent,
                         double u_lo_cap = -60.0, double u_hi_cap = 60.0);

/// Apply a frozen rule: sum_i w[i] g(t[i]), chunked deterministically.
double semiinf_apply(const SemiInfRule& rule,
                     const std::function<double(double)>& g);

struct QuadResult {
  double value = 0.0;
  bool converged = true;
  double rel_err_est = 0.0;
};

/// integral_0^inf g(t) dt with adaptive window and refinement; value is the
/// best estimate even when the convergence flag is false.
QuadResult quad_semiinf(const std::function<double(double)>& g,
                        const QuadSpec& spec, double endpoint_exponent);

/// Points log-spaced between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace ouk

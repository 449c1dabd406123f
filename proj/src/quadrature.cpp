#include "ouk/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "ouk/parallel.hpp"

namespace ouk {

namespace {

// Eigenvalue decomposition of the Jacobi matrix gives nodes (eigenvalues) and
// weights (mu_0 * first eigenvector component squared).
Quad1D golub_welsch(const Vector& subdiag, double mu0) {
  const Eigen::Index n = subdiag.size() + 1;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(Vector::Zero(n), subdiag,
                            Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("golub_welsch: eigenvalue iteration failed");
  Quad1D rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights(i) = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

Quad1D gauss_hermite_1d(int order) {
  if (order < 1) throw InvalidInput("gauss_hermite_1d: order must be >= 1");
  if (order == 1) {
    Quad1D r;
    r.nodes = Vector::Zero(1);
    r.weights = Vector::Constant(1, std::sqrt(M_PI));
    return r;
  }
  Vector sub(order - 1);
  for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(0.5 * k);
  return golub_welsch(sub, std::sqrt(M_PI));
}

Quad1D gauss_legendre_1d(int order) {
  if (order < 1) throw InvalidInput("gauss_legendre_1d: order must be >= 1");
  if (order == 1) {
    Quad1D r;
    r.nodes = Vector::Zero(1);
    r.weights = Vector::Constant(1, 2.0);
    return r;
  }
  Vector sub(order - 1);
  for (int k = 1; k < order; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(sub, 2.0);
}

const TensorRule& gauss_hermite(int dim, int order) {
  if (dim < 1) throw InvalidInput("gauss_hermite: dim must be >= 1");
  if (dim > 4)
    throw GuardError(
        "gauss_hermite: tensor rules are limited to dimension 4; higher "
        "dimensions need a different integration strategy");
  if (order < 1) throw InvalidInput("gauss_hermite: order must be >= 1");

  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<TensorRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{dim, order}];
  if (!slot) {
    const Quad1D base = gauss_hermite_1d(order);
    auto rule = std::make_unique<TensorRule>();
    rule->dim = dim;
    rule->order = order;
    long rows = 1;
    for (int d = 0; d < dim; ++d) rows *= order;
    rule->nodes.resize(rows, dim);
    rule->weights.resize(rows);
    std::vector<int> idx(dim, 0);
    for (long r = 0; r < rows; ++r) {
      double w = 1.0;
      for (int d = 0; d < dim; ++d) {
        rule->nodes(r, d) = base.nodes(idx[d]);
        w *= base.weights(idx[d]);
      }
      rule->weights(r) = w;
      for (int d = dim - 1; d >= 0; --d) {
        if (++idx[d] < order) break;
        idx[d] = 0;
      }
    }
    slot = std::move(rule);
  }
  return *slot;
}

namespace {

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  double contrib = 0.0;
};

// Integral of g(e^u) e^u over [lo, hi] with an npanels-fold composite rule.
double panel_eval(const std::function<double(double)>& g, const Quad1D& gl,
                  double lo, double hi, int npanels) {
  double total = 0.0;
  const double w = (hi - lo) / npanels;
  for (int p = 0; p < npanels; ++p) {
    const double a = lo + p * w;
    double s = 0.0;
    for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) {
      const double u = a + 0.5 * w * (gl.nodes(j) + 1.0);
      const double t = std::exp(u);
      s += 0.5 * w * gl.weights(j) * g(t) * t;
    }
    total += s;
  }
  return total;
}

}  // namespace

SemiInfRule semiinf_rule(const std::function<double(double)>& probe,
                         const QuadSpec& spec, double endpoint_exponent,
                         double u_lo_cap, double u_hi_cap) {
  spec.check();
  const Quad1D gl = gauss_legendre_1d(spec.panel_order);

  std::vector<double> usplit;
  usplit.reserve(spec.split_points.size());
  for (double s : spec.split_points) usplit.push_back(std::log(s));
  if (usplit.empty()) usplit.push_back(0.0);

  // Seed window: a declared non-integrable endpoint power means the integrand
  // itself must decay, so start deeper on the left.
  const double left_pad = (1.0 + endpoint_exponent <= 0.0) ? 14.0 : 10.0;
  const double seed_lo = std::max(usplit.front() - left_pad, u_lo_cap);
  const double seed_hi = std::min(usplit.back() + 10.0, u_hi_cap);

  const double width = 2.0;
  std::vector<Panel> panels;
  auto add_panel = [&](double lo, double hi, bool front) {
    Panel p;
    p.lo = lo;
    p.hi = hi;
    p.contrib = panel_eval(probe, gl, lo, hi, 1);
    if (front)
      panels.insert(panels.begin(), p);
    else
      panels.push_back(p);
  };

  // Panels between consecutive split points, then filler down to seed_lo and
  // up to seed_hi.
  for (std::size_t i = 0; i + 1 < usplit.size(); ++i) {
    const double a = usplit[i], b = usplit[i + 1];
    const int k = std::max(1, (int)std::ceil((b - a) / width));
    for (int j = 0; j < k; ++j)
      add_panel(a + (b - a) * j / k, a + (b - a) * (j + 1) / k, false);
  }
  for (double hi = usplit.front(); hi > seed_lo + 1e-12;) {
    const double lo = std::max(hi - width, seed_lo);
    add_panel(lo, hi, true);
    hi = lo;
  }
  for (double lo = usplit.back(); lo < seed_hi - 1e-12;) {
    const double hi = std::min(lo + width, seed_hi);
    add_panel(lo, hi, false);
    lo = hi;
  }

  auto total_of = [&]() {
    double s = 0.0;
    for (const Panel& p : panels) s += p.contrib;
    return s;
  };

  // Grow the window while the outermost panels still matter.
  double total = total_of();
  for (int iter = 0; iter < 200; ++iter) {
    const double thresh =
        std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) / 10.0;
    bool grew = false;
    if (std::abs(panels.front().contrib) > thresh &&
        panels.front().lo > u_lo_cap + 1e-9) {
      add_panel(std::max(panels.front().lo - width, u_lo_cap),
                panels.front().lo, true);
      grew = true;
    }
    if (std::abs(panels.back().contrib) > thresh &&
        panels.back().hi < u_hi_cap - 1e-9) {
      add_panel(panels.back().hi, std::min(panels.back().hi + width, u_hi_cap),
                false);
      grew = true;
    }
    if (!grew) break;
    total = total_of();
  }

  // Refine by halving panels until totals settle.
  SemiInfRule rule;
  int split = 1;
  double prev = total;
  rule.converged = false;
  for (int r = 0; r <= spec.max_refinements; ++r) {
    if (r > 0) {
      split *= 2;
      double t2 = 0.0;
      for (const Panel& p : panels) t2 += panel_eval(probe, gl, p.lo, p.hi, split);
      const double diff = std::abs(t2 - prev);
      prev = t2;
      rule.refinements = r;
      rule.rel_err_est = diff / std::max(std::abs(t2), 1e-300);
      if (diff <= std::max(spec.abs_tol, spec.rel_tol * std::abs(t2))) {
        rule.converged = true;
        break;
      }
    } else if (spec.max_refinements == 0) {
      break;
    }
  }

  // Freeze the final discretization.
  for (const Panel& p : panels) {
    const double w = (p.hi - p.lo) / split;
    for (int s = 0; s < split; ++s) {
      const double a = p.lo + s * w;
      for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) {
        const double u = a + 0.5 * w * (gl.nodes(j) + 1.0);
        const double t = std::exp(u);
        rule.t.push_back(t);
        rule.w.push_back(0.5 * w * gl.weights(j) * t);
      }
    }
  }
  return rule;
}

double semiinf_apply(const SemiInfRule& rule,
                     const std::function<double(double)>& g) {
  return chunked_sum(rule.t.size(),
                     [&](std::size_t i) { return rule.w[i] * g(rule.t[i]); });
}

QuadResult quad_semiinf(const std::function<double(double)>& g,
                        const QuadSpec& spec, double endpoint_exponent) {
  const SemiInfRule rule = semiinf_rule(g, spec, endpoint_exponent);
  QuadResult out;
  out.value = semiinf_apply(rule, g);
  out.converged = rule.converged;
  out.rel_err_est = rule.rel_err_est;
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0) || !(hi > lo) || n < 2)
    throw InvalidInput("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i)
    g[i] = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

}  // namespace ouk

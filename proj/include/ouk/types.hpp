#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ouk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalues of a real square matrix, with multiplicity. For real input the
/// list is closed under conjugation up to solver tolerance.
struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;

  double max_real_part() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues) m = std::max(m, ev.real());
    return m;
  }
};

/// Quadrature configuration shared by the semigroup and time-integral engines.
///
/// gh_order 0 means "pick by dimension": 40 nodes per axis for N <= 2 and 20
/// for N in {3,4}. split_points partition (0,inf) for the semi-infinite engine;
/// panels live in log-time between and beyond them.
struct QuadSpec {
  int gh_order = 0;
  std::vector<double> split_points = {1.0};
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_refinements = 8;
  int panel_order = 16;   // Gauss-Legendre nodes per log-time panel
  int cesaro_order = 32;  // Gauss-Legendre order for averages over [0,t]

  void check() const;

  int gh_order_for_dim(int dim) const {
    if (gh_order > 0) return gh_order;
    return dim <= 2 ? 40 : 20;
  }
};

/// Invalid user input: malformed descriptions, failed validation, bad flags.
struct InvalidInput : std::runtime_error {
  std::vector<std::string> violations;
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
  InvalidInput(const std::string& what, std::vector<std::string> v)
      : std::runtime_error(what), violations(std::move(v)) {}
};

/// A precondition of the underlying theory failed: non-hypoelliptic system,
/// potential order at or above the dimension at infinity, unsupported
/// dimension for tensor quadrature, wrong trace sign for a suite.
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Outcome flag for adaptive integrals: value is the best estimate, converged
/// tells whether successive refinements agreed within tolerance.
struct QuadStatus {
  bool converged = true;
  double rel_err_est = 0.0;
  int refinements = 0;
};

inline void QuadSpec::check() const {
  std::vector<std::string> bad;
  if (gh_order < 0) bad.push_back("gh_order must be >= 1 (or 0 for automatic)");
  if (rel_tol <= 0 || abs_tol <= 0) bad.push_back("tolerances must be positive");
  if (max_refinements < 0) bad.push_back("max_refinements must be >= 0");
  if (panel_order < 2) bad.push_back("panel_order must be >= 2");
  double prev = 0.0;
  for (double s : split_points) {
    if (!(s > prev)) {
      bad.push_back("split_points must be strictly increasing and positive");
      break;
    }
    prev = s;
  }
  if (!bad.empty()) throw InvalidInput("invalid quadrature spec", bad);
}

}  // namespace ouk

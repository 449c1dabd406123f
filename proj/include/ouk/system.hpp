#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ouk/types.hpp"

namespace ouk {

/// Degenerate Ornstein-Uhlenbeck system: generator tr(Q D^2 u) + <BX, grad u>.
/// Q is symmetric positive semidefinite (possibly singular); B is arbitrary.
struct OUSystem {
  std::string name;
  std::string key;  // registry key the system was built from, if any
  int dim = 0;
  Matrix Q;
  Matrix B;
};

/// Validate a user-supplied system. Collects every violation (asymmetric Q,
/// Q with an eigenvalue below -1e-10, dimension below 2, shape mismatch,
/// non-finite entries) into one InvalidInput.
OUSystem validate(const std::string& name, int dim, const Matrix& Q,
                  const Matrix& B);

/// Built-in registry, keyed "name" or "name:k" where k scales the block size
/// (heat:k and ou:k give dimension k; kolmogorov:k, friction-kolmogorov:k and
/// degenerate-ou:k give dimension 2k; kramers and smoluchowski are fixed at
/// dimension 2). Unscaled defaults are dimension 2.
OUSystem make_system(const std::string& key);

bool is_builtin(const std::string& name);
const std::vector<std::string>& builtin_names();

/// Closed-form volume function V(t) for a registry system; throws
/// InvalidInput for systems without one.
double builtin_volume(const OUSystem& sys, double t);
bool has_closed_form(const OUSystem& sys);

/// Rank of the controllability matrix [Q, BQ, ..., B^{N-1}Q]; first element
/// tells whether it is full (the hypoellipticity criterion).
std::pair<bool, int> kalman_check(const OUSystem& sys);

/// Smallest eigenvalue of G(t0) = t0 K(t0); strictly positive exactly when
/// the system is hypoelliptic.
double hypo_certificate(const OUSystem& sys, double t0 = 1.0);

/// Rank increments p_j of [Q, BQ, ..., B^jQ] up to full rank, and the
/// homogeneous dimension d0 = sum (2j+1) p_j. Throws GuardError when full
/// rank is never reached (non-hypoelliptic input).
struct Filtration {
  std::vector<int> p;
  int d0 = 0;
};

Filtration filtration(const OUSystem& sys);

/// Largest real part of the spectrum of B.
double spectral_abscissa(const OUSystem& sys);

struct StructureReport {
  bool hypoelliptic = false;
  int kalman_rank = 0;
  std::vector<int> p;      // empty when not hypoelliptic
  int d0_structural = 0;   // 0 when not hypoelliptic
  double trace_B = 0.0;
  bool trace_ok = false;   // trace B >= -1e-12
  double L0 = 0.0;         // spectral abscissa of B
  Spectrum spec;
};

StructureReport structure_report(const OUSystem& sys);

}  // namespace ouk

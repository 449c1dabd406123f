#pragma once

#include <string>
#include <vector>

#include "ouk/system.hpp"
#include "ouk/types.hpp"

namespace ouk {

struct VolumeRow {
  double t = 0.0;
  double V = 0.0;
  double log_t = 0.0;
  double log_V = 0.0;
};

/// Sampled volume function V(t) = omega_N det(t K(t))^{1/2}. Throws
/// GuardError naming the usable range when some t overflows the Gramian.
std::vector<VolumeRow> volume_curve(const OUSystem& sys, double t_min,
                                    double t_max, int points,
                                    bool log_spacing = true);

struct D0Estimate {
  double fitted = 0.0;    // 2 * slope of log V against log t as t -> 0
  double residual = 0.0;  // max abs deviation of the fit over the window
};

/// Least-squares fit of log V on 16 log-spaced points in [1e-4, 1e-2].
D0Estimate d0_estimate(const OUSystem& sys);

enum class DinfKind { finite, infinite, zero };

struct DinfResult {
  DinfKind kind = DinfKind::finite;
  double value = 0.0;  // meaningful only for kind == finite
  double residual = 0.0;
  double t_max_used = 0.0;
};

/// Large-time volume exponent. Detection order: spectral abscissa of B
/// above 1e-10 means exponential growth (infinite marker); volume growth
/// V(t_max)/V(1) below 10 means bounded volume (zero marker); otherwise
/// 2 * slope of log V over [t_max/100, t_max].
DinfResult dinf_estimate(const OUSystem& sys, double t_max = 1e4);

enum class GrowthClass { polynomial, exponential, bounded };

struct GrowthReport {
  GrowthClass growth_class = GrowthClass::polynomial;
  double L0 = 0.0;          // min over t in [1, t_max] of V(t)/t
  double gamma_D = 0.0;     // min over the grid of V(t)/t^{D0/2}
  double vol2_gamma = 0.0;  // min of V(t)/min(t^{D0/2}, t^{Dinf/2})
};

/// Certified lower-bound constants for the volume over a log grid on
/// [1e-4, 1e4] (truncated to the representable range when the Gramian
/// overflows). A positive vol2_gamma certifies the two-exponent lower
/// volume bound used by the Sobolev suite.
GrowthReport growth_classify(const OUSystem& sys, const D0Estimate& d0,
                             const DinfResult& dinf);

struct DimensionReport {
  int D0_structural = 0;
  double D0_fitted = 0.0;
  DinfResult Dinf;
  GrowthClass growth_class = GrowthClass::polynomial;
  double L0 = 0.0;
  double fit_residual_d0 = 0.0;
  double fit_residual_dinf = 0.0;
  double gamma_D = 0.0;
  double vol2_gamma = 0.0;
};

DimensionReport dimension_report(const OUSystem& sys, double t_max = 1e4);

}  // namespace ouk

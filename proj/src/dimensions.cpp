#include "ouk/dimensions.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ouk/kernel.hpp"
#include "ouk/quadrature.hpp"

namespace ouk {

namespace {

// Above this log-volume the value itself leaves the double range even when
// the Gramian is still representable.
constexpr double kLogVOverflow = 708.0;

struct SlopeFit {
  double two_slope = 0.0;
  double residual = 0.0;
};

SlopeFit fit_two_slope(const std::vector<VolumeRow>& rows) {
  const double n = static_cast<double>(rows.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const VolumeRow& r : rows) {
    sx += r.log_t;
    sy += r.log_V;
    sxx += r.log_t * r.log_t;
    sxy += r.log_t * r.log_V;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  SlopeFit fit;
  fit.two_slope = 2.0 * slope;
  for (const VolumeRow& r : rows)
    fit.residual =
        std::max(fit.residual, std::abs(icept + slope * r.log_t - r.log_V));
  return fit;
}

// Evaluates the log-volume at t, reporting false when it cannot be computed
// in double precision. Besides outright overflow of the covariance entries,
// a strongly expanding drift drives the covariance condition number like
// e^{2t}/t, and once the smallest eigenvalue falls below rounding the
// Cholesky factorization fails even though every entry is still finite.
bool try_log_volume(const OUSystem& sys, double t, double* out) {
  try {
    *out = log_volume(sys, t);
    return true;
  } catch (const std::overflow_error&) {
    return false;
  } catch (const GuardError&) {
    throw;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::runtime_error&) {
    return false;
  }
}

// Largest time at or below t_max where the volume is still representable.
double usable_t_max(const OUSystem& sys, double t_max) {
  double t = t_max;
  for (int i = 0; i < 400 && t > 1e-4; ++i, t *= 0.8) {
    double lv;
    if (try_log_volume(sys, t, &lv) && lv < kLogVOverflow) return t;
  }
  throw GuardError(
      "volume function is not representable anywhere in [1e-4, " +
      std::to_string(t_max) + "] for this system");
}

}  // namespace

std::vector<VolumeRow> volume_curve(const OUSystem& sys, double t_min,
                                    double t_max, int points,
                                    bool log_spacing) {
  if (!(t_min > 0.0) || !(t_max >= t_min) || !std::isfinite(t_max))
    throw InvalidInput("volume_curve needs 0 < t_min <= t_max < inf");
  if (points < 2) throw InvalidInput("volume_curve needs at least 2 points");
  std::vector<double> ts;
  if (log_spacing) {
    ts = log_grid(t_min, t_max, points);
  } else {
    ts.resize(points);
    for (int i = 0; i < points; ++i)
      ts[i] = t_min + (t_max - t_min) * i / (points - 1);
  }
  std::vector<VolumeRow> rows;
  rows.reserve(ts.size());
  for (double t : ts) {
    double lv;
    if (!try_log_volume(sys, t, &lv) || lv >= kLogVOverflow) {
      const std::string usable =
          rows.empty() ? "no sampled time below it was usable"
                       : "largest usable sampled time is " +
                             std::to_string(rows.back().t);
      throw GuardError("volume is not representable in double precision at t = " +
                       std::to_string(t) + "; " + usable +
                       " for this system");
    }
    VolumeRow row;
    row.t = t;
    row.V = std::exp(lv);
    row.log_t = std::log(t);
    row.log_V = lv;
    rows.push_back(row);
  }
  return rows;
}

D0Estimate d0_estimate(const OUSystem& sys) {
  const std::vector<VolumeRow> rows = volume_curve(sys, 1e-4, 1e-2, 16);
  const SlopeFit fit = fit_two_slope(rows);
  D0Estimate out;
  out.fitted = fit.two_slope;
  out.residual = fit.residual;
  return out;
}

DinfResult dinf_estimate(const OUSystem& sys, double t_max) {
  if (!(t_max > 1.0) || !std::isfinite(t_max))
    throw InvalidInput("dinf_estimate needs a finite t_max above 1");
  DinfResult out;
  if (spectral_abscissa(sys) > 1e-10) {
    out.kind = DinfKind::infinite;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const double t_hi = usable_t_max(sys, t_max);
  out.t_max_used = t_hi;
  const double growth = log_volume(sys, t_hi) - log_volume(sys, 1.0);
  if (growth < std::log(10.0)) {
    out.kind = DinfKind::zero;
    out.value = 0.0;
    return out;
  }
  const std::vector<VolumeRow> rows =
      volume_curve(sys, t_hi / 100.0, t_hi, 16);
  const SlopeFit fit = fit_two_slope(rows);
  out.kind = DinfKind::finite;
  out.value = fit.two_slope;
  out.residual = fit.residual;
  return out;
}

GrowthReport growth_classify(const OUSystem& sys, const D0Estimate& d0,
                             const DinfResult& dinf) {
  GrowthReport rep;
  switch (dinf.kind) {
    case DinfKind::infinite:
      rep.growth_class = GrowthClass::exponential;
      break;
    case DinfKind::zero:
      rep.growth_class = GrowthClass::bounded;
      break;
    case DinfKind::finite:
      rep.growth_class = GrowthClass::polynomial;
      break;
  }
  const double t_hi = usable_t_max(sys, 1e4);
  const double half_d0 = 0.5 * d0.fitted;
  const double inf = std::numeric_limits<double>::infinity();
  double min_l0 = inf, min_gamma = inf, min_vol2 = inf;
  for (double t : log_grid(1e-4, t_hi, 128)) {
    double lv;
    if (!try_log_volume(sys, t, &lv)) continue;
    const double lt = std::log(t);
    if (t >= 1.0) min_l0 = std::min(min_l0, lv - lt);
    min_gamma = std::min(min_gamma, lv - half_d0 * lt);
    // Envelope exponent of the two-power lower bound
    // min(t^{D0/2}, t^{Dinf/2}) in log form. With exponential growth the
    // small-time half of the bound is vacuous, so those points are skipped;
    // with bounded volume the large-time power degenerates to the constant 1.
    double env;
    switch (dinf.kind) {
      case DinfKind::infinite:
        if (t < 1.0) continue;
        env = half_d0 * lt;
        break;
      case DinfKind::zero:
        env = std::min(half_d0 * lt, 0.0);
        break;
      case DinfKind::finite:
      default:
        env = std::min(half_d0 * lt, 0.5 * dinf.value * lt);
        break;
    }
    min_vol2 = std::min(min_vol2, lv - env);
  }
  rep.L0 = std::exp(min_l0);
  rep.gamma_D = std::exp(min_gamma);
  rep.vol2_gamma = std::exp(min_vol2);
  return rep;
}

DimensionReport dimension_report(const OUSystem& sys, double t_max) {
  const StructureReport sr = structure_report(sys);
  if (!sr.hypoelliptic)
    throw GuardError(
        "dimension analysis requires a hypoelliptic system; Kalman rank is " +
        std::to_string(sr.kalman_rank) + " of " + std::to_string(sys.dim));
  const D0Estimate d0 = d0_estimate(sys);
  const DinfResult dinf = dinf_estimate(sys, t_max);
  const GrowthReport growth = growth_classify(sys, d0, dinf);
  DimensionReport rep;
  rep.D0_structural = sr.d0_structural;
  rep.D0_fitted = d0.fitted;
  rep.Dinf = dinf;
  rep.growth_class = growth.growth_class;
  rep.L0 = growth.L0;
  rep.fit_residual_d0 = d0.residual;
  rep.fit_residual_dinf = dinf.residual;
  rep.gamma_D = growth.gamma_D;
  rep.vol2_gamma = growth.vol2_gamma;
  return rep;
}

}  // namespace ouk

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ouk/system.hpp"
#include "ouk/types.hpp"

namespace ouk {

struct CheckRow {
  std::string description;
  double value = 0.0;  // measured quantity
  double bound = 0.0;  // threshold it is compared against
  bool pass = false;
  bool informational = false;  // reported but not counted toward the verdict
};

struct SuiteResult {
  std::string suite;
  std::string system;
  bool pass = false;
  std::vector<CheckRow> checks;  // sorted by description
  double runtime_seconds = 0.0;  // serialized only when timing is requested
};

struct SuiteOptions {
  double s = 0.5;
  double p = 2.0;
  std::uint64_t seed = 0xC0FFEEULL;
  QuadSpec quad;
};

/// Semigroup identities: kernel mass, dual mass against e^{-t tr B},
/// Chapman-Kolmogorov, generator-semigroup commutation, and the covariance
/// composition law.
SuiteResult suite_core(const OUSystem& sys, const SuiteOptions& opts = {});

/// Riesz inversion of the fractional power in both composition orders.
/// Refuses systems with tr B < 0 or with 2s too close to the convergence
/// threshold of the outer integral; the second direction degrades to an
/// informational skip when only it is infeasible.
SuiteResult suite_inversion(const OUSystem& sys, const SuiteOptions& opts = {});

/// Pointwise domination of the Poisson maximal function by averaged
/// semigroup suprema, plus a grid weak-type (1,1) bound.
SuiteResult suite_maximal(const OUSystem& sys, const SuiteOptions& opts = {});

/// Regularization exponent of the Riesz potential: ratio stability of
/// ||I_{2s} f||_q / ||f||_p under quadrature refinement at the Sobolev
/// exponent q, with the volume lower-bound certificate that backs it.
SuiteResult suite_sobolev(const OUSystem& sys, const SuiteOptions& opts = {});

/// Ultracontractivity constants ||P_t||_{p -> inf} from kernel power
/// integrals, sharpness through the Holder-equality slice, and the
/// subordinated semigroup version with its slack factor.
SuiteResult suite_ultracontractive(const OUSystem& sys,
                                   const SuiteOptions& opts = {});

/// Dispatch by suite name; InvalidInput for unknown names.
SuiteResult run_suite(const std::string& name, const OUSystem& sys,
                      const SuiteOptions& opts = {});

const std::vector<std::string>& suite_names();

}  // namespace ouk

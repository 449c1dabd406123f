#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "ouk/dimensions.hpp"
#include "ouk/system.hpp"
#include "ouk/types.hpp"

using namespace ouk;

TEST_CASE("sampled volume matches the closed forms") {
  for (const char* key : {"heat:2", "kolmogorov:1", "kramers"}) {
    const OUSystem sys = make_system(key);
    const auto rows = volume_curve(sys, 0.1, 10.0, 12);
    REQUIRE(rows.size() == 12);
    for (const auto& row : rows) {
      CHECK(row.V == doctest::Approx(builtin_volume(sys, row.t)).epsilon(1e-10));
      CHECK(row.log_t == doctest::Approx(std::log(row.t)).epsilon(1e-12));
      CHECK(row.log_V == doctest::Approx(std::log(row.V)).epsilon(1e-12));
    }
    CHECK(rows.front().t == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rows.back().t == doctest::Approx(10.0).epsilon(1e-12));
  }
}

TEST_CASE("volume sampling reports the usable range on overflow") {
  const OUSystem sys = make_system("friction-kolmogorov:1");
  try {
    volume_curve(sys, 1.0, 1e4, 40);
    FAIL("expected GuardError");
  } catch (const GuardError& e) {
    CHECK(std::string(e.what()).find("usable") != std::string::npos);
  }
  CHECK_THROWS_AS(volume_curve(sys, -1.0, 1.0, 10), InvalidInput);
  CHECK_THROWS_AS(volume_curve(sys, 2.0, 1.0, 10), InvalidInput);
  CHECK_THROWS_AS(volume_curve(sys, 1.0, 2.0, 1), InvalidInput);
}

TEST_CASE("small-time fit recovers the structural dimension") {
  struct Row {
    const char* key;
    double d0;
  };
  for (const auto& row : std::vector<Row>{{"heat:2", 2.0},
                                          {"ou:2", 2.0},
                                          {"kolmogorov:1", 4.0},
                                          {"kramers", 4.0},
                                          {"smoluchowski", 4.0},
                                          {"friction-kolmogorov:1", 4.0},
                                          {"degenerate-ou:1", 4.0}}) {
    const OUSystem sys = make_system(row.key);
    const D0Estimate est = d0_estimate(sys);
    CHECK(std::abs(est.fitted - row.d0) <= 0.05);
    CHECK(filtration(sys).d0 == static_cast<int>(row.d0));
  }
}

TEST_CASE("large-time classification separates the three regimes") {
  const DinfResult heat = dinf_estimate(make_system("heat:2"));
  CHECK(heat.kind == DinfKind::finite);
  CHECK(std::abs(heat.value - 2.0) <= 0.05);

  const DinfResult kol = dinf_estimate(make_system("kolmogorov:1"));
  CHECK(kol.kind == DinfKind::finite);
  CHECK(std::abs(kol.value - 4.0) <= 0.05);

  const DinfResult kram = dinf_estimate(make_system("kramers"));
  CHECK(kram.kind == DinfKind::finite);
  CHECK(std::abs(kram.value - 2.0) <= 0.1);

  CHECK(dinf_estimate(make_system("ou:2")).kind == DinfKind::zero);
  CHECK(dinf_estimate(make_system("smoluchowski")).kind == DinfKind::zero);

  const DinfResult fk = dinf_estimate(make_system("friction-kolmogorov:1"));
  CHECK(fk.kind == DinfKind::infinite);
  CHECK(std::isinf(fk.value));

  CHECK(dinf_estimate(make_system("degenerate-ou:1")).kind ==
        DinfKind::finite);

  CHECK_THROWS_AS(dinf_estimate(make_system("heat:2"), 0.5), InvalidInput);
}

TEST_CASE("growth classification and volume lower-bound certificates") {
  const OUSystem kram = make_system("kramers");
  const GrowthReport kr = growth_classify(kram, d0_estimate(kram),
                                          dinf_estimate(kram));
  CHECK(kr.growth_class == GrowthClass::polynomial);
  CHECK(kr.L0 > 0.0);
  CHECK(kr.gamma_D > 0.0);
  CHECK(kr.vol2_gamma > 0.0);

  const OUSystem fk = make_system("friction-kolmogorov:1");
  const GrowthReport fkr = growth_classify(fk, d0_estimate(fk),
                                           dinf_estimate(fk));
  CHECK(fkr.growth_class == GrowthClass::exponential);
  CHECK(fkr.vol2_gamma > 0.0);

  const OUSystem ou = make_system("ou:2");
  const GrowthReport our = growth_classify(ou, d0_estimate(ou),
                                           dinf_estimate(ou));
  CHECK(our.growth_class == GrowthClass::bounded);
}

TEST_CASE("full dimension report for a finite-dimensional model") {
  const DimensionReport rep = dimension_report(make_system("kolmogorov:1"));
  CHECK(rep.D0_structural == 4);
  CHECK(std::abs(rep.D0_fitted - 4.0) <= 0.05);
  CHECK(rep.Dinf.kind == DinfKind::finite);
  CHECK(std::abs(rep.Dinf.value - 4.0) <= 0.05);
  CHECK(rep.growth_class == GrowthClass::polynomial);
  CHECK(rep.vol2_gamma > 0.0);
}

TEST_CASE("dimension report refuses a non-controllable system") {
  Matrix Q = Matrix::Zero(2, 2);
  Q(0, 0) = 1.0;
  const OUSystem sys = validate("stuck", 2, Q, Matrix::Identity(2, 2));
  CHECK_THROWS_AS(dimension_report(sys), GuardError);
}

TEST_CASE("large-time dimension is at least two for the plane models") {
  for (const char* key : {"heat:2", "kolmogorov:1", "kramers"}) {
    const DinfResult r = dinf_estimate(make_system(key));
    REQUIRE(r.kind == DinfKind::finite);
    CHECK(r.value >= 2.0 - 0.05);
  }
}

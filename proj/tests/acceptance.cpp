// Acceptance harness: each criterion is one numbered check with pinned
// tolerances, printing a single PASS/FAIL line. Exit status is the number of
// failed criteria, so each registered test maps to one criterion.
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "ouk/dimensions.hpp"
#include "ouk/fractional.hpp"
#include "ouk/kernel.hpp"
#include "ouk/numerics.hpp"
#include "ouk/quadrature.hpp"
#include "ouk/rng.hpp"
#include "ouk/suites.hpp"
#include "ouk/system.hpp"
#include "ouk/types.hpp"

using namespace ouk;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& msg) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += msg;
  }
  void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

const std::vector<std::string>& registry() { return builtin_names(); }

double classical_poisson(int N, double z, double r) {
  const double c =
      std::tgamma(0.5 * (N + 1)) / std::pow(M_PI, 0.5 * (N + 1));
  return c * z * std::pow(z * z + r * r, -0.5 * (N + 1));
}

// 1. Time-averaged covariance of the kinetic transport model, entrywise
//    against [[1, t/2], [t/2, t^2/3]] at t in {0.1, 1, 10}, within 1e-10.
Outcome criterion_1() {
  Outcome o;
  const OUSystem sys = make_system("kolmogorov:1");
  for (double t : {0.1, 1.0, 10.0}) {
    Matrix want(2, 2);
    want << 1.0, 0.5 * t, 0.5 * t, t * t / 3.0;
    const Matrix got = covariance_eval(sys, t).K;
    const double err = (got - want).cwiseAbs().maxCoeff();
    o.require(err <= 1e-10,
              "t = " + num(t) + ": entrywise error " + num(err));
  }
  return o;
}

// 2. Volume function of every registry system against its closed form at
//    t in {0.1, 1, 5, 10}, relative 1e-8 (1e-6 at t = 10 for the two
//    exponentially drifting families, whose closed forms cancel there).
Outcome criterion_2() {
  Outcome o;
  for (const std::string& name : registry()) {
    const OUSystem sys = make_system(name);
    for (double t : {0.1, 1.0, 5.0, 10.0}) {
      const double want = builtin_volume(sys, t);
      const double got = std::exp(log_volume(sys, t));
      const bool loose =
          t == 10.0 &&
          (name == "friction-kolmogorov" || name == "degenerate-ou");
      const double tol = loose ? 1e-6 : 1e-8;
      const double rel = std::abs(got - want) / want;
      o.require(rel <= tol,
                name + " t = " + num(t) + ": rel " + num(rel));
    }
  }
  return o;
}

// 3. Kinetic transport kernel divided by the explicit Gaussian profile
//    t^{-2} exp(-E/t) is the same constant sqrt(3)/(2 pi) for every
//    (X, Y, t), to 1e-8 over 20 random samples.
Outcome criterion_3() {
  Outcome o;
  const OUSystem sys = make_system("kolmogorov:1");
  const double want = std::sqrt(3.0) / (2.0 * M_PI);
  Rng rng(0xC0FFEE);
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double v = rng.uniform(-2.0, 2.0);
    const double x = rng.uniform(-2.0, 2.0);
    const double w = rng.uniform(-2.0, 2.0);
    const double y = rng.uniform(-2.0, 2.0);
    const double t = rng.uniform(0.2, 3.0);
    const double e = (v - w) * (v - w) +
                     (3.0 / t) * (v - w) * (y - x - t * v) +
                     (3.0 / (t * t)) * (x - y + t * v) * (x - y + t * v);
    const double profile = std::exp(-e / t) / (t * t);
    const double ratio =
        kernel_eval(sys, t, vec2(v, x), vec2(w, y)) / profile;
    if (i == 0) lo = hi = ratio;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    o.require(std::abs(ratio - want) <= 1e-8 * want,
              "sample " + std::to_string(i) + ": ratio " + num(ratio));
  }
  o.require(hi - lo <= 1e-8 * want,
            "ratio spread " + num(hi - lo) + " across samples");
  return o;
}

// 4. Kernel mass 1 (absolute 1e-8) and dual mass e^{-t tr B} (relative
//    1e-6) for every registry system at t in {0.1, 1, 10}.
Outcome criterion_4() {
  Outcome o;
  Rng rng(0xC0FFEE);
  for (const std::string& name : registry()) {
    const OUSystem sys = make_system(name);
    for (double t : {0.1, 1.0, 10.0}) {
      const Vector X = rng.uniform_vec(sys.dim, -1.0, 1.0);
      const double mass = kernel_mass(sys, t, X);
      o.require(std::abs(mass - 1.0) <= 1e-8,
                name + " t = " + num(t) + ": mass " + num(mass));
      const double want = std::exp(-t * sys.B.trace());
      const double dual = kernel_dual_mass(sys, t, X);
      o.require(std::abs(dual - want) <= 1e-6 * want,
                name + " t = " + num(t) + ": dual mass rel " +
                    num(std::abs(dual - want) / want));
    }
  }
  return o;
}

// 5. Two-step composition against the one-step kernel, relative 1e-6 at
//    (s, t) in {(0.2, 0.5), (1, 1)} over 10 random point pairs, for free
//    diffusion, kinetic transport, and the rotation model.
Outcome criterion_5() {
  Outcome o;
  Rng rng(0xC0FFEE);
  for (const char* key : {"heat:2", "kolmogorov:1", "kramers"}) {
    const OUSystem sys = make_system(key);
    for (const auto& st : std::vector<std::pair<double, double>>{
             {0.2, 0.5}, {1.0, 1.0}}) {
      for (int i = 0; i < 10; ++i) {
        const Vector X = rng.uniform_vec(sys.dim, -1.5, 1.5);
        const Vector Y = rng.uniform_vec(sys.dim, -1.5, 1.5);
        const double lhs =
            chapman_kolmogorov_lhs(sys, st.first, st.second, X, Y);
        const double rhs = kernel_eval(sys, st.first + st.second, X, Y);
        const double rel = std::abs(lhs - rhs) / rhs;
        o.require(rel <= 1e-6, std::string(key) + " (s,t) = (" +
                                   num(st.first) + "," + num(st.second) +
                                   ") sample " + std::to_string(i) +
                                   ": rel " + num(rel));
      }
    }
  }
  return o;
}

// 6. Covariance composition G(s+t) = e^{tB} G(s) e^{tB^T} + G(t) for every
//    registry system, relative 1e-10 in Frobenius norm.
Outcome criterion_6() {
  Outcome o;
  for (const std::string& name : registry()) {
    const OUSystem sys = make_system(name);
    for (const auto& st : std::vector<std::pair<double, double>>{
             {0.2, 0.5}, {1.0, 1.0}, {0.5, 2.0}}) {
      const double s = st.first, t = st.second;
      const Matrix gs = gramian(sys.Q, sys.B, s);
      const Matrix gt = gramian(sys.Q, sys.B, t);
      const Matrix gst = gramian(sys.Q, sys.B, s + t);
      const Matrix e = mat_exp(sys.B, t);
      const Matrix rhs = e * gs * e.transpose() + gt;
      const double rel = (gst - rhs).norm() / gst.norm();
      o.require(rel <= 1e-10, name + " (s,t) = (" + num(s) + "," + num(t) +
                                  "): rel " + num(rel));
    }
  }
  return o;
}

// 7. Dimension table: structural small-time dimension exactly as tabulated,
//    fitted value within 0.05, and the large-time exponent per family
//    (finite values within the stated windows, zero and infinite markers
//    where the volume saturates or explodes).
Outcome criterion_7() {
  Outcome o;
  struct Row {
    const char* key;
    int d0;
    DinfKind kind;
    double dinf;
    double window;
  };
  const double nan = std::nan("");
  const std::vector<Row> rows = {
      {"heat:2", 2, DinfKind::finite, 2.0, 0.05},
      {"ou:2", 2, DinfKind::zero, nan, 0.0},
      {"kolmogorov:1", 4, DinfKind::finite, 4.0, 0.05},
      {"kramers", 4, DinfKind::finite, 2.0, 0.1},
      {"smoluchowski", 4, DinfKind::zero, nan, 0.0},
      {"friction-kolmogorov:1", 4, DinfKind::infinite, nan, 0.0},
      {"degenerate-ou:1", 4, DinfKind::finite, 2.0, 0.1},
  };
  for (const Row& row : rows) {
    const OUSystem sys = make_system(row.key);
    const int structural = filtration(sys).d0;
    o.require(structural == row.d0,
              std::string(row.key) + ": structural " +
                  std::to_string(structural) + " != " +
                  std::to_string(row.d0));
    const D0Estimate d0 = d0_estimate(sys);
    o.require(std::abs(d0.fitted - row.d0) <= 0.05,
              std::string(row.key) + ": fitted small-time dimension " +
                  num(d0.fitted));
    const DinfResult dinf = dinf_estimate(sys);
    if (dinf.kind != row.kind) {
      o.fail(std::string(row.key) + ": large-time kind mismatch");
      continue;
    }
    if (row.kind == DinfKind::finite) {
      o.require(std::abs(dinf.value - row.dinf) <= row.window,
                std::string(row.key) + ": large-time dimension " +
                    num(dinf.value) + " outside " + num(row.dinf) +
                    " +/- " + num(row.window));
    }
  }
  return o;
}

// 8. Subordinated kernel with weight a = 0 for free diffusion against the
//    classical Poisson kernel, relative 1e-6, ten samples over N in {1, 2}.
Outcome criterion_8() {
  Outcome o;
  Rng rng(0xC0FFEE);
  for (int N : {1, 2}) {
    const OUSystem sys = make_system("heat:" + std::to_string(N));
    for (int i = 0; i < 5; ++i) {
      const Vector X = rng.uniform_vec(N, -1.5, 1.5);
      const Vector Y = rng.uniform_vec(N, -1.5, 1.5);
      const double z = rng.uniform(0.3, 2.0);
      const double want = classical_poisson(N, z, (X - Y).norm());
      const double got = poisson_kernel(sys, 0.0, X, Y, z);
      const double rel = std::abs(got - want) / want;
      o.require(rel <= 1e-6, "N = " + std::to_string(N) + " sample " +
                                 std::to_string(i) + ": rel " + num(rel));
    }
  }
  return o;
}

// 9. The potential of order 2s applied to the fractional power of order s
//    returns the function: grid maximum error at most 1e-3 for s in
//    {0.25, 0.5, 0.75} on the line (5 points) and in the kinetic plane
//    (5 x 5 grid on [-2, 2]^2).
Outcome criterion_9() {
  Outcome o;
  for (double s : {0.25, 0.5, 0.75}) {
    {
      const OUSystem sys = make_system("heat:1");
      const GaussianExpFn f = unit_gaussian(1);
      std::vector<Vector> pts;
      for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) pts.push_back(vec1(x));
      const std::vector<double> got = riesz_of_fracpower(sys, s, f, pts);
      double worst = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i)
        worst = std::max(worst, std::abs(got[i] - f(pts[i])));
      o.require(worst <= 1e-3,
                "line, s = " + num(s) + ": max error " + num(worst));
    }
    {
      const OUSystem sys = make_system("kolmogorov:1");
      const GaussianExpFn f = unit_gaussian(2);
      std::vector<Vector> pts;
      for (double a : {-2.0, -1.0, 0.0, 1.0, 2.0})
        for (double b : {-2.0, -1.0, 0.0, 1.0, 2.0})
          pts.push_back(vec2(a, b));
      const std::vector<double> got = riesz_of_fracpower(sys, s, f, pts);
      double worst = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i)
        worst = std::max(worst, std::abs(got[i] - f(pts[i])));
      o.require(worst <= 1e-3,
                "plane, s = " + num(s) + ": max error " + num(worst));
    }
  }
  return o;
}

// 10. Composing two half powers reproduces the negated generator to 1e-4
//     relative, at five points per system chosen where the generator image
//     is well away from zero.
Outcome criterion_10() {
  Outcome o;
  {
    const OUSystem sys = make_system("heat:1");
    const GaussianExpFn f = unit_gaussian(1);
    std::vector<Vector> pts;
    for (double x : {0.0, 0.5, 1.5, 2.0, -0.7}) pts.push_back(vec1(x));
    const std::vector<double> got =
        fracpower_compose(sys, 0.5, 0.5, f, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double want = -generator_apply(sys, f, pts[i]);
      const double rel = std::abs(got[i] - want) / std::abs(want);
      o.require(rel <= 1e-4,
                "line point " + std::to_string(i) + ": rel " + num(rel));
    }
  }
  {
    const OUSystem sys = make_system("kolmogorov:1");
    const GaussianExpFn f = unit_gaussian(2);
    const std::vector<Vector> pts = {vec2(0.0, 0.0), vec2(0.0, 1.0),
                                     vec2(1.0, -1.0), vec2(0.5, 0.5),
                                     vec2(-1.0, 0.5)};
    const std::vector<double> got =
        fracpower_compose(sys, 0.5, 0.5, f, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double want = -generator_apply(sys, f, pts[i]);
      const double rel = std::abs(got[i] - want) / std::abs(want);
      o.require(rel <= 1e-4,
                "plane point " + std::to_string(i) + ": rel " + num(rel));
    }
  }
  return o;
}

// 11. The extension function solves its degenerate equation (residual at
//     most 1e-3 of the local term scale on a height grid in [0.5, 2]) and
//     its weighted boundary flux at z = 1e-3 recovers the fractional power
//     to 1e-2 relative, for s in {0.3, 0.5}.
Outcome criterion_11() {
  Outcome o;
  struct Cfg {
    const char* key;
    Vector X;
  };
  std::vector<Cfg> cfgs;
  cfgs.push_back({"heat:1", vec1(0.4)});
  cfgs.push_back({"kolmogorov:1", vec2(0.3, -0.4)});
  for (const Cfg& cfg : cfgs) {
    const OUSystem sys = make_system(cfg.key);
    const GaussianExpFn f = unit_gaussian(sys.dim);
    for (double s : {0.3, 0.5}) {
      for (double z : {0.5, 0.8, 1.25, 2.0}) {
        ExtensionPoint pt;
        pt.X = cfg.X;
        pt.z = z;
        pt.a = 1.0 - 2.0 * s;
        const ResidualReport rep = extension_residual(sys, f, pt);
        o.require(std::abs(rep.residual) <= 1e-3 * rep.scale,
                  std::string(cfg.key) + " s = " + num(s) + " z = " +
                      num(z) + ": residual " + num(rep.residual) +
                      " vs scale " + num(rep.scale));
      }
      const double want = fractional_power(sys, s, f, cfg.X).value;
      const double got = neumann_trace(sys, s, f, cfg.X);
      const double rel = std::abs(got - want) / std::abs(want);
      o.require(rel <= 1e-2, std::string(cfg.key) + " s = " + num(s) +
                                 ": boundary flux rel " + num(rel));
    }
  }
  return o;
}

// 12. The height-maximal function of the subordinated semigroup is
//     dominated pointwise by 3.5 times the supremum of time averages on a
//     ten-point grid, and satisfies the grid weak-type bound with constant
//     2 * 3.5 at lambda in {0.1, 0.5, 1} times the sup norm.
Outcome criterion_12() {
  Outcome o;
  for (const char* key : {"heat:1", "kolmogorov:1"}) {
    const OUSystem sys = make_system(key);
    const GaussianExpFn f = unit_gaussian(sys.dim);
    const std::vector<double> tgrid = log_grid(1e-3, 1e3, 32);

    std::vector<Vector> pts;
    if (sys.dim == 1) {
      for (int i = 0; i < 10; ++i) pts.push_back(vec1(-4.5 + i * 1.0));
    } else {
      for (double a : {-3.0, 0.0, 3.0})
        for (double b : {-3.0, 0.0, 3.0}) pts.push_back(vec2(a, b));
      pts.push_back(vec2(1.5, -1.5));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double mstar = poisson_maximal(sys, f, pts[i]);
      double cesaro_sup = 0.0;
      for (double t : tgrid)
        cesaro_sup = std::max(
            cesaro_sup, std::abs(cesaro_average(sys, t, f, pts[i])));
      o.require(mstar <= 3.5 * cesaro_sup,
                std::string(key) + " point " + std::to_string(i) + ": " +
                    num(mstar) + " > 3.5 * " + num(cesaro_sup));
    }

    // weak-type bound over a measured grid on [-5, 5]^dim
    const double half = 5.0;
    std::vector<Vector> cells;
    double cell_measure = 0.0;
    if (sys.dim == 1) {
      const int n = 256;
      cell_measure = 2.0 * half / n;
      for (int i = 0; i < n; ++i)
        cells.push_back(vec1(-half + (i + 0.5) * cell_measure));
    } else {
      const int n = 48;
      const double h = 2.0 * half / n;
      cell_measure = h * h;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          cells.push_back(
              vec2(-half + (i + 0.5) * h, -half + (j + 0.5) * h));
    }
    std::vector<double> mvals(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      mvals[i] = poisson_maximal(sys, f, cells[i]);
    const double l1 = gaussian_mass(f);
    for (double lam : {0.1, 0.5, 1.0}) {
      double measure = 0.0;
      for (double m : mvals)
        if (m > lam) measure += cell_measure;
      const double bound = 2.0 * 3.5 * l1 / lam;
      o.require(measure <= bound,
                std::string(key) + " lambda = " + num(lam) + ": measure " +
                    num(measure) + " > " + num(bound));
    }
  }
  return o;
}

// 13. The Sobolev suite passes with the expected target exponents (p = 1.5
//     to q = 6 for planar free diffusion, p = 2 to q = 4 for kinetic
//     transport) and the rotation model carries a positive two-exponent
//     volume certificate.
Outcome criterion_13() {
  Outcome o;
  struct Cfg {
    const char* key;
    double p;
    double q;
  };
  for (const Cfg& cfg : std::vector<Cfg>{{"heat:2", 1.5, 6.0},
                                         {"kolmogorov:1", 2.0, 4.0}}) {
    const OUSystem sys = make_system(cfg.key);
    SuiteOptions opts;
    opts.s = 0.5;
    opts.p = cfg.p;
    const SuiteResult r = suite_sobolev(sys, opts);
    o.require(r.pass, std::string(cfg.key) + ": suite failed");
    bool found = false;
    for (const CheckRow& row : r.checks) {
      if (row.description.rfind("target exponent q", 0) == 0) {
        found = true;
        o.require(std::abs(row.value - cfg.q) <= 1e-9,
                  std::string(cfg.key) + ": q = " + num(row.value) +
                      " != " + num(cfg.q));
      }
    }
    o.require(found, std::string(cfg.key) + ": no target exponent row");
  }
  const OUSystem kram = make_system("kramers");
  const GrowthReport growth =
      growth_classify(kram, d0_estimate(kram), dinf_estimate(kram));
  o.require(growth.vol2_gamma > 0.0,
            "rotation model: two-exponent certificate " +
                num(growth.vol2_gamma));
  return o;
}

// 14. Two identical command-line verification runs produce byte-identical
//     output and exit cleanly.
Outcome criterion_14() {
  Outcome o;
#ifndef OUK_CLI_PATH
  o.fail("no CLI path compiled in");
  return o;
#else
  const std::string cmd = std::string(OUK_CLI_PATH) +
                          " verify heat --suite core --format json";
  auto capture = [&o, &cmd](std::string& dst) {
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
      o.fail("could not start the CLI");
      return;
    }
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0)
      dst.append(buf, got);
    const int status = pclose(pipe);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
      o.fail("CLI exited with a nonzero status");
  };
  std::string first, second;
  capture(first);
  capture(second);
  o.require(!first.empty(), "CLI produced no output");
  o.require(first == second, "outputs differ between runs");
  return o;
#endif
}

struct Criterion {
  int id;
  const char* summary;
  Outcome (*fn)();
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "two-block covariance matches its closed form", criterion_1},
      {2, "registry volumes match their closed forms", criterion_2},
      {3, "kinetic kernel has a constant Gaussian profile ratio",
       criterion_3},
      {4, "kernel mass and dual mass", criterion_4},
      {5, "two-step composition reproduces the kernel", criterion_5},
      {6, "covariance composition law", criterion_6},
      {7, "fitted dimensions match the structural table", criterion_7},
      {8, "subordinated kernel reduces to the classical Poisson kernel",
       criterion_8},
      {9, "potential of order 2s inverts the fractional power of order s",
       criterion_9},
      {10, "half-power composition reproduces the negated generator",
       criterion_10},
      {11, "extension equation residual and boundary flux", criterion_11},
      {12, "maximal function domination and weak-type bound", criterion_12},
      {13, "Sobolev suite stability and volume certificate", criterion_13},
      {14, "byte-identical repeated verification", criterion_14},
  };
  return list;
}

int run_one(const Criterion& c) {
  const Outcome o = c.fn();
  if (o.pass) {
    std::printf("criterion %d: PASS %s\n", c.id, c.summary);
    return 0;
  }
  std::printf("criterion %d: FAIL %s (%s)\n", c.id, c.summary,
              o.detail.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    const int id = std::atoi(argv[1]);
    for (const Criterion& c : criteria())
      if (c.id == id) return run_one(c);
    std::fprintf(stderr, "unknown criterion %d\n", id);
    return 2;
  }
  int failures = 0;
  for (const Criterion& c : criteria()) failures += run_one(c);
  return failures;
}

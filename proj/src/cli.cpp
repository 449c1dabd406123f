#include "ouk/cli.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "ouk/dimensions.hpp"
#include "ouk/fractional.hpp"
#include "ouk/kernel.hpp"
#include "ouk/serialize.hpp"
#include "ouk/suites.hpp"
#include "ouk/system.hpp"
#include "ouk/types.hpp"

namespace ouk {

namespace {

Vector to_vector(const std::vector<double>& v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    x(static_cast<Eigen::Index>(i)) = v[i];
  return x;
}

/// Resolve a system argument. A bare scalable family name takes its
/// dimension from the evaluation point when one was given: heat and ou use
/// the point dimension directly, the two-block families halve it.
OUSystem resolve_system(const std::string& key, const std::string& file,
                        int point_len) {
  if (!file.empty()) return system_from_json_file(file);
  if (key.empty()) throw InvalidInput("no system given");
  if (key.find(':') != std::string::npos || !is_builtin(key))
    return make_system(key);
  if (point_len > 0) {
    if (key == "heat" || key == "ou")
      return make_system(key + ":" + std::to_string(point_len));
    if (key == "kramers" || key == "smoluchowski") {
      if (point_len != 2)
        throw InvalidInput(key + " is two-dimensional; got a point of length " +
                           std::to_string(point_len));
      return make_system(key);
    }
    if (point_len % 2 != 0)
      throw InvalidInput(key + " splits the state in two equal blocks and "
                               "needs an even-dimensional point");
    return make_system(key + ":" + std::to_string(point_len / 2));
  }
  return make_system(key);
}

JValue vector_jvalue(const Vector& x) {
  JValue arr = JValue::array();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    arr.push(JValue::number(x(i)));
  return arr;
}

void emit_kv_csv(std::ostream& out,
                 const std::vector<std::pair<std::string, std::string>>& rows) {
  out << "key,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << v << "\n";
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

struct Globals {
  int quad_order = 0;
  std::uint64_t seed = 0xC0FFEEULL;
  double tol = 0.0;
  std::string format = "json";
  bool timing = false;

  QuadSpec quad() const {
    QuadSpec spec;
    if (quad_order > 0) spec.gh_order = quad_order;
    if (tol > 0.0) spec.rel_tol = tol;
    return spec;
  }
  bool json() const { return format == "json"; }
};

int run_check(std::ostream& out, const Globals& g, const std::string& key,
              const std::string& file, double t0) {
  const OUSystem sys = resolve_system(key, file, 0);
  const StructureReport rep = structure_report(sys);
  const double cert = hypo_certificate(sys, t0);
  if (g.json()) {
    JValue obj = JValue::object();
    obj.set("system", JValue::str(sys.name));
    obj.set("dim", JValue::integer(sys.dim));
    JValue body = to_jvalue(rep);
    for (auto& kv : body.fields) obj.fields.push_back(std::move(kv));
    obj.set("hypo_certificate_t0", JValue::number(t0));
    obj.set("hypo_certificate", JValue::number(cert));
    out << obj.dump();
  } else {
    out << structure_csv(rep);
    out << "hypo_certificate_t0," << csv_num(t0) << "\n";
    out << "hypo_certificate," << csv_num(cert) << "\n";
  }
  return 0;
}

int run_volume(std::ostream& out, const Globals& g, const std::string& key,
               const std::string& file, double t_min, double t_max, int points,
               bool linear) {
  const OUSystem sys = resolve_system(key, file, 0);
  const std::vector<VolumeRow> rows =
      volume_curve(sys, t_min, t_max, points, !linear);
  std::vector<double> closed, relerr;
  if (has_closed_form(sys)) {
    closed.reserve(rows.size());
    relerr.reserve(rows.size());
    for (const VolumeRow& row : rows) {
      const double cf = builtin_volume(sys, row.t);
      closed.push_back(cf);
      relerr.push_back(cf != 0.0 ? std::abs(row.V - cf) / cf : 0.0);
    }
  }
  if (g.json()) {
    JValue obj = JValue::object();
    obj.set("system", JValue::str(sys.name));
    obj.set("dim", JValue::integer(sys.dim));
    obj.set("rows", volume_to_jvalue(rows, closed, relerr));
    out << obj.dump();
  } else {
    out << volume_csv(rows, closed, relerr);
  }
  return 0;
}

int run_dims(std::ostream& out, const Globals& g, const std::string& key,
             const std::string& file, double t_max) {
  const OUSystem sys = resolve_system(key, file, 0);
  const DimensionReport rep = dimension_report(sys, t_max);
  if (g.json()) {
    JValue obj = JValue::object();
    obj.set("system", JValue::str(sys.name));
    obj.set("dim", JValue::integer(sys.dim));
    JValue body = to_jvalue(rep);
    for (auto& kv : body.fields) obj.fields.push_back(std::move(kv));
    out << obj.dump();
  } else {
    out << "key,value\nsystem," << sys.name << "\ndim," << sys.dim << "\n"
        << dimensions_csv(rep).substr(10);
  }
  return 0;
}

int run_kernel(std::ostream& out, const Globals& g, const std::string& key,
               const std::string& file, double t,
               const std::vector<double>& xv, const std::vector<double>& yv) {
  const OUSystem sys =
      resolve_system(key, file, static_cast<int>(xv.size()));
  const Vector X = to_vector(xv);
  const Vector Y = to_vector(yv);
  const double value = kernel_eval(sys, t, X, Y);
  const double dist = pseudo_distance(sys, t, X, Y);
  const double vol = std::exp(log_volume(sys, t));
  if (g.json()) {
    JValue obj = JValue::object();
    obj.set("system", JValue::str(sys.name));
    obj.set("dim", JValue::integer(sys.dim));
    obj.set("t", JValue::number(t));
    obj.set("x", vector_jvalue(X));
    obj.set("y", vector_jvalue(Y));
    obj.set("value", JValue::number(value));
    obj.set("pseudo_distance", JValue::number(dist));
    obj.set("volume", JValue::number(vol));
    out << obj.dump();
  } else {
    emit_kv_csv(out, {{"system", sys.name},
                      {"dim", std::to_string(sys.dim)},
                      {"t", csv_num(t)},
                      {"value", csv_num(value)},
                      {"pseudo_distance", csv_num(dist)},
                      {"volume", csv_num(vol)}});
  }
  return 0;
}

int run_apply(std::ostream& out, std::ostream& err, const Globals& g,
              const std::string& key, const std::string& file,
              const std::string& op, const std::vector<double>& xv, double t,
              double z, double s, double alpha, double lambda,
              const std::string& fn_file, const std::string& small_time) {
  const OUSystem sys =
      resolve_system(key, file, static_cast<int>(xv.size()));
  const Vector X = to_vector(xv);
  const GaussianExpFn f =
      fn_file.empty() ? unit_gaussian(sys.dim) : fn_from_json_file(fn_file);
  const QuadSpec quad = g.quad();

  double value = 0.0;
  bool have_quality = false;
  bool converged = false;
  double rel_err = 0.0;

  if (op == "semigroup") {
    if (!(t > 0.0)) throw InvalidInput("semigroup needs --t > 0");
    value = std::exp(semigroup_apply_gaussian(sys, t, f).log_value(X));
  } else if (op == "cesaro") {
    if (!(t > 0.0)) throw InvalidInput("cesaro needs --t > 0");
    value = cesaro_average(sys, t, f, X, quad);
  } else if (op == "generator") {
    value = generator_apply(sys, f, X);
  } else if (op == "fracpower") {
    FracSpec fs;
    fs.s = s;
    fs.quad = quad;
    fs.small_time_mode = small_time == "fd" ? SmallTimeMode::finite_difference
                                            : SmallTimeMode::oracle_gaussian;
    const QuadResult qr = fractional_power_dispatch(sys, fs, f, X);
    value = qr.value;
    have_quality = true;
    converged = qr.converged;
    rel_err = qr.rel_err_est;
  } else if (op == "fracpower-resolvent") {
    const QuadResult qr = fractional_power_resolvent(sys, s, f, X, quad);
    value = qr.value;
    have_quality = true;
    converged = qr.converged;
    rel_err = qr.rel_err_est;
  } else if (op == "poisson") {
    value = poisson_apply(sys, z, f, X, quad);
  } else if (op == "extension") {
    value = extension_eval(sys, s, f, X, z, quad);
  } else if (op == "neumann") {
    value = neumann_trace(sys, s, f, X, z > 0.0 ? z : 1e-3, quad);
  } else if (op == "riesz") {
    value = riesz_apply(sys, alpha, f, X, quad);
  } else if (op == "riesz-poisson") {
    value = riesz_apply_poisson(sys, alpha, f, X, quad);
  } else if (op == "resolvent") {
    if (sys.B.trace() < -1e-12)
      err << "warning: trace B is negative; the Laplace-transform integral "
             "is computed, but the resolvent reading on L^p is outside the "
             "supported range\n";
    value = resolvent_apply(sys, lambda, f, X, quad);
  } else {
    throw InvalidInput(
        "unknown op: " + op +
        " (available: semigroup, cesaro, generator, fracpower, "
        "fracpower-resolvent, poisson, extension, neumann, riesz, "
        "riesz-poisson, resolvent)");
  }

  if (g.json()) {
    JValue obj = JValue::object();
    obj.set("system", JValue::str(sys.name));
    obj.set("dim", JValue::integer(sys.dim));
    obj.set("op", JValue::str(op));
    obj.set("x", vector_jvalue(X));
    obj.set("value", JValue::number(value));
    if (have_quality) {
      obj.set("converged", JValue::boolean(converged));
      obj.set("rel_err_est", JValue::number(rel_err));
    }
    out << obj.dump();
  } else {
    std::vector<std::pair<std::string, std::string>> rows = {
        {"system", sys.name},
        {"dim", std::to_string(sys.dim)},
        {"op", op},
        {"value", csv_num(value)}};
    if (have_quality) {
      rows.emplace_back("converged", converged ? "true" : "false");
      rows.emplace_back("rel_err_est", csv_num(rel_err));
    }
    emit_kv_csv(out, rows);
  }
  return 0;
}

int run_verify(std::ostream& out, const Globals& g, const std::string& key,
               const std::string& file, const std::string& suite, double s,
               double p) {
  std::vector<OUSystem> systems;
  if (key == "all" && file.empty()) {
    for (const std::string& name : builtin_names())
      systems.push_back(make_system(name));
  } else {
    systems.push_back(resolve_system(key, file, 0));
  }
  std::vector<std::string> suites;
  if (suite == "all") {
    suites = suite_names();
  } else {
    suites.push_back(suite);
  }
  SuiteOptions opts;
  opts.s = s;
  opts.p = p;
  opts.seed = g.seed;
  opts.quad = g.quad();

  std::vector<SuiteResult> results;
  for (const OUSystem& sys : systems)
    for (const std::string& name : suites)
      results.push_back(run_suite(name, sys, opts));

  bool all_pass = true;
  for (const SuiteResult& r : results)
    if (!r.pass) all_pass = false;

  if (g.json()) {
    JValue obj = JValue::object();
    obj.set("pass", JValue::boolean(all_pass));
    JValue arr = JValue::array();
    for (const SuiteResult& r : results) arr.push(to_jvalue(r, g.timing));
    obj.set("results", std::move(arr));
    out << obj.dump();
  } else {
    out << suites_csv(results, g.timing);
  }
  return all_pass ? 0 : 1;
}

int run_table(std::ostream& out, const Globals& g,
              const std::vector<std::string>& keys) {
  std::vector<OUSystem> systems;
  if (keys.empty()) {
    for (const std::string& name : builtin_names())
      systems.push_back(make_system(name));
  } else {
    for (const std::string& k : keys) systems.push_back(make_system(k));
  }
  struct Row {
    std::string name;
    int dim;
    StructureReport sr;
    DimensionReport dr;
  };
  std::vector<Row> rows;
  for (const OUSystem& sys : systems) {
    Row row;
    row.name = sys.name;
    row.dim = sys.dim;
    row.sr = structure_report(sys);
    row.dr = dimension_report(sys);
    rows.push_back(std::move(row));
  }
  if (g.json()) {
    JValue arr = JValue::array();
    for (const Row& row : rows) {
      JValue obj = JValue::object();
      obj.set("name", JValue::str(row.name));
      obj.set("dim", JValue::integer(row.dim));
      obj.set("hypoelliptic", JValue::boolean(row.sr.hypoelliptic));
      obj.set("kalman_rank", JValue::integer(row.sr.kalman_rank));
      obj.set("d0_structural", JValue::integer(row.sr.d0_structural));
      obj.set("d0_fitted", JValue::number(row.dr.D0_fitted));
      obj.set("dinf_kind",
              JValue::str(row.dr.Dinf.kind == DinfKind::infinite ? "infinite"
                          : row.dr.Dinf.kind == DinfKind::zero   ? "zero"
                                                                 : "finite"));
      obj.set("dinf_value", JValue::number(row.dr.Dinf.value));
      obj.set("trace_B", JValue::number(row.sr.trace_B));
      obj.set("growth_class",
              JValue::str(row.dr.growth_class == GrowthClass::exponential
                              ? "exponential"
                          : row.dr.growth_class == GrowthClass::bounded
                              ? "bounded"
                              : "polynomial"));
      arr.push(std::move(obj));
    }
    out << arr.dump();
  } else {
    out << "name,dim,hypoelliptic,kalman_rank,d0_structural,d0_fitted,dinf,"
           "trace_B,growth_class\n";
    for (const Row& row : rows) {
      std::string dinf;
      switch (row.dr.Dinf.kind) {
        case DinfKind::infinite:
          dinf = "inf";
          break;
        case DinfKind::zero:
          dinf = "0";
          break;
        case DinfKind::finite:
        default:
          dinf = csv_num(row.dr.Dinf.value);
          break;
      }
      out << row.name << ',' << row.dim << ','
          << (row.sr.hypoelliptic ? "true" : "false") << ','
          << row.sr.kalman_rank << ',' << row.sr.d0_structural << ','
          << csv_num(row.dr.D0_fitted) << ',' << dinf << ','
          << csv_num(row.sr.trace_B) << ','
          << (row.dr.growth_class == GrowthClass::exponential ? "exponential"
              : row.dr.growth_class == GrowthClass::bounded   ? "bounded"
                                                              : "polynomial")
          << "\n";
    }
  }
  return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"degenerate Ornstein-Uhlenbeck semigroup toolkit"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--quad-order", g.quad_order,
                 "Gauss-Hermite order override (0 = pick by dimension)");
  app.add_option("--seed", g.seed, "seed for randomized checks");
  app.add_option("--tol", g.tol, "relative quadrature tolerance override");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--timing", g.timing, "include runtimes in suite output");

  std::string c_system, c_file;
  double c_t0 = 1.0;
  CLI::App* check = app.add_subcommand(
      "check", "hypoellipticity and structure of a system");
  check->fallthrough();
  check->add_option("system", c_system, "built-in key, e.g. heat:2");
  check->add_option("--system-file", c_file, "JSON file with Q and B");
  check->add_option("--t0", c_t0, "time for the covariance certificate");

  std::string v_system, v_file;
  double v_tmin = 0.01, v_tmax = 100.0;
  int v_points = 50;
  bool v_linear = false;
  CLI::App* volume =
      app.add_subcommand("volume", "volume function V(t) over a time range");
  volume->fallthrough();
  volume->add_option("system", v_system, "built-in key");
  volume->add_option("--system-file", v_file, "JSON file with Q and B");
  volume->add_option("--t-min", v_tmin, "start time");
  volume->add_option("--t-max", v_tmax, "end time");
  volume->add_option("--points", v_points, "number of samples");
  volume->add_flag("--linear", v_linear, "linear instead of log spacing");

  std::string d_system, d_file;
  double d_tmax = 1e4;
  CLI::App* dims = app.add_subcommand(
      "dims", "fitted volume dimensions and growth classification");
  dims->fallthrough();
  dims->add_option("system", d_system, "built-in key");
  dims->add_option("--system-file", d_file, "JSON file with Q and B");
  dims->add_option("--t-max", d_tmax, "largest time for the large-time fit");

  std::string k_system, k_file;
  double k_t = 1.0;
  std::vector<double> k_x, k_y;
  CLI::App* kernel =
      app.add_subcommand("kernel", "evaluate the transition kernel");
  kernel->fallthrough();
  kernel->add_option("system", k_system, "built-in key");
  kernel->add_option("--system-file", k_file, "JSON file with Q and B");
  kernel->add_option("--t", k_t, "time")->required();
  kernel->add_option("--x", k_x, "start point, comma separated")
      ->required()
      ->delimiter(',');
  kernel->add_option("--y", k_y, "end point, comma separated")
      ->required()
      ->delimiter(',');

  std::string a_system, a_file, a_op, a_fn, a_small = "oracle";
  std::vector<double> a_x;
  double a_t = 0.0, a_z = 0.0, a_s = 0.5, a_alpha = 1.0, a_lambda = 1.0;
  CLI::App* apply = app.add_subcommand(
      "apply", "apply an operator of the calculus to a function at a point");
  apply->fallthrough();
  apply->add_option("system", a_system, "built-in key");
  apply->add_option("--system-file", a_file, "JSON file with Q and B");
  apply->add_option("--op", a_op, "operator name")->required();
  apply->add_option("--x", a_x, "evaluation point, comma separated")
      ->required()
      ->delimiter(',');
  apply->add_option("--t", a_t, "time for semigroup and cesaro");
  apply->add_option("--z", a_z, "height for poisson, extension, neumann");
  apply->add_option("--s", a_s, "fractional order in (0, 1)");
  apply->add_option("--alpha", a_alpha, "Riesz order");
  apply->add_option("--lambda", a_lambda, "resolvent parameter");
  apply->add_option("--fn", a_fn,
                    "JSON file with the Gaussian-exponential function "
                    "(default: unit Gaussian)");
  apply->add_option("--small-time", a_small,
                    "small-time branch of the fractional power")
      ->check(CLI::IsMember({"oracle", "fd"}));

  std::string vf_system = "all", vf_file, vf_suite = "all";
  double vf_s = 0.5, vf_p = 2.0;
  CLI::App* verify =
      app.add_subcommand("verify", "run verification suites");
  verify->fallthrough();
  verify->add_option("system", vf_system, "built-in key or 'all'");
  verify->add_option("--system-file", vf_file, "JSON file with Q and B");
  verify->add_option("--suite", vf_suite,
                     "core, inversion, maximal, sobolev, ultracontractive, "
                     "or 'all'");
  verify->add_option("--s", vf_s, "fractional order for inversion/sobolev");
  verify->add_option("--p", vf_p, "integrability exponent");

  std::vector<std::string> t_systems;
  CLI::App* table = app.add_subcommand(
      "table", "summary table of structure and dimensions");
  table->fallthrough();
  table->add_option("systems", t_systems,
                    "built-in keys (default: every registry family)");

  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.emplace_back("ouk");
  for (const std::string& a : args) full.push_back(a);
  std::vector<char*> argv;
  argv.reserve(full.size());
  for (std::string& s : full) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return run_check(out, g, c_system, c_file, c_t0);
    if (volume->parsed())
      return run_volume(out, g, v_system, v_file, v_tmin, v_tmax, v_points,
                        v_linear);
    if (dims->parsed()) return run_dims(out, g, d_system, d_file, d_tmax);
    if (kernel->parsed())
      return run_kernel(out, g, k_system, k_file, k_t, k_x, k_y);
    if (apply->parsed())
      return run_apply(out, err, g, a_system, a_file, a_op, a_x, a_t, a_z,
                       a_s, a_alpha, a_lambda, a_fn, a_small);
    if (verify->parsed())
      return run_verify(out, g, vf_system, vf_file, vf_suite, vf_s, vf_p);
    if (table->parsed()) return run_table(out, g, t_systems);
    err << "error: no subcommand\n";
    return 2;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const GuardError& e) {
    err << "guard: " << e.what() << "\n";
    return 3;
  } catch (const std::overflow_error& e) {
    err << "guard: value left the double range: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ouk

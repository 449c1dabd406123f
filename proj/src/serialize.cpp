#include "ouk/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace ouk {

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string number_token(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  return format_double(v);
}

void dump_rec(const JValue& v, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1),
                           ' ');
  switch (v.kind) {
    case JValue::Kind::null:
      out += "null";
      return;
    case JValue::Kind::boolean:
      out += v.bval ? "true" : "false";
      return;
    case JValue::Kind::integer:
      out += std::to_string(v.ival);
      return;
    case JValue::Kind::number:
      out += number_token(v.nval);
      return;
    case JValue::Kind::string:
      out += '"' + json_escape(v.sval) + '"';
      return;
    case JValue::Kind::array: {
      if (v.items.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.items.size(); ++i) {
        out += pad_in;
        dump_rec(v.items[i], indent, depth + 1, out);
        if (i + 1 < v.items.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      return;
    }
    case JValue::Kind::object: {
      if (v.fields.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      for (std::size_t i = 0; i < v.fields.size(); ++i) {
        out += pad_in + '"' + json_escape(v.fields[i].first) + "\": ";
        dump_rec(v.fields[i].second, indent, depth + 1, out);
        if (i + 1 < v.fields.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      return;
    }
  }
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

const char* dinf_kind_name(DinfKind k) {
  switch (k) {
    case DinfKind::infinite:
      return "infinite";
    case DinfKind::zero:
      return "zero";
    case DinfKind::finite:
    default:
      return "finite";
  }
}

const char* growth_class_name(GrowthClass g) {
  switch (g) {
    case GrowthClass::exponential:
      return "exponential";
    case GrowthClass::bounded:
      return "bounded";
    case GrowthClass::polynomial:
    default:
      return "polynomial";
  }
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw InvalidInput(what + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw InvalidInput(what + " rows must be non-empty arrays");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw InvalidInput(what + " rows must all have the same length");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number())
        throw InvalidInput(what + " entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j[i][k].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidInput(what + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

JValue JValue::boolean(bool v) {
  JValue j;
  j.kind = Kind::boolean;
  j.bval = v;
  return j;
}

JValue JValue::integer(long long v) {
  JValue j;
  j.kind = Kind::integer;
  j.ival = v;
  return j;
}

JValue JValue::number(double v) {
  JValue j;
  j.kind = Kind::number;
  j.nval = v;
  return j;
}

JValue JValue::str(std::string v) {
  JValue j;
  j.kind = Kind::string;
  j.sval = std::move(v);
  return j;
}

JValue JValue::array() {
  JValue j;
  j.kind = Kind::array;
  return j;
}

JValue JValue::object() {
  JValue j;
  j.kind = Kind::object;
  return j;
}

JValue& JValue::push(JValue v) {
  items.push_back(std::move(v));
  return items.back();
}

JValue& JValue::set(const std::string& key, JValue v) {
  fields.emplace_back(key, std::move(v));
  return fields.back().second;
}

std::string JValue::dump(int indent) const {
  std::string out;
  dump_rec(*this, indent, 0, out);
  out += '\n';
  return out;
}

JValue to_jvalue(const StructureReport& r) {
  JValue j = JValue::object();
  j.set("hypoelliptic", JValue::boolean(r.hypoelliptic));
  j.set("kalman_rank", JValue::integer(r.kalman_rank));
  JValue p = JValue::array();
  for (int pi : r.p) p.push(JValue::integer(pi));
  j.set("p", std::move(p));
  j.set("d0_structural", JValue::integer(r.d0_structural));
  j.set("trace_B", JValue::number(r.trace_B));
  j.set("trace_ok", JValue::boolean(r.trace_ok));
  j.set("spectral_abscissa", JValue::number(r.L0));
  JValue eig = JValue::array();
  for (const auto& ev : r.spec.eigenvalues) {
    JValue pair = JValue::array();
    pair.push(JValue::number(ev.real()));
    pair.push(JValue::number(ev.imag()));
    eig.push(std::move(pair));
  }
  j.set("eigenvalues", std::move(eig));
  return j;
}

JValue to_jvalue(const DimensionReport& r) {
  JValue j = JValue::object();
  j.set("D0_structural", JValue::integer(r.D0_structural));
  j.set("D0_fitted", JValue::number(r.D0_fitted));
  JValue dinf = JValue::object();
  dinf.set("kind", JValue::str(dinf_kind_name(r.Dinf.kind)));
  dinf.set("value", JValue::number(r.Dinf.value));
  dinf.set("fit_residual", JValue::number(r.Dinf.residual));
  dinf.set("t_max_used", JValue::number(r.Dinf.t_max_used));
  j.set("Dinf", std::move(dinf));
  j.set("growth_class", JValue::str(growth_class_name(r.growth_class)));
  j.set("L0", JValue::number(r.L0));
  j.set("fit_residual_d0", JValue::number(r.fit_residual_d0));
  j.set("gamma_D", JValue::number(r.gamma_D));
  j.set("vol2_gamma", JValue::number(r.vol2_gamma));
  return j;
}

JValue to_jvalue(const SuiteResult& r, bool timing) {
  JValue j = JValue::object();
  j.set("suite", JValue::str(r.suite));
  j.set("system", JValue::str(r.system));
  j.set("pass", JValue::boolean(r.pass));
  JValue checks = JValue::array();
  for (const CheckRow& c : r.checks) {
    JValue row = JValue::object();
    row.set("description", JValue::str(c.description));
    row.set("value", JValue::number(c.value));
    row.set("bound", JValue::number(c.bound));
    row.set("pass", JValue::boolean(c.pass));
    row.set("informational", JValue::boolean(c.informational));
    checks.push(std::move(row));
  }
  j.set("checks", std::move(checks));
  if (timing) j.set("runtime_seconds", JValue::number(r.runtime_seconds));
  return j;
}

JValue volume_to_jvalue(const std::vector<VolumeRow>& rows,
                        const std::vector<double>& closed_form,
                        const std::vector<double>& rel_err) {
  JValue arr = JValue::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    JValue row = JValue::object();
    row.set("t", JValue::number(rows[i].t));
    row.set("V", JValue::number(rows[i].V));
    row.set("logt", JValue::number(rows[i].log_t));
    row.set("logV", JValue::number(rows[i].log_V));
    if (!closed_form.empty()) {
      row.set("closed_form", JValue::number(closed_form[i]));
      row.set("rel_err", JValue::number(rel_err[i]));
    }
    arr.push(std::move(row));
  }
  return arr;
}

std::string structure_csv(const StructureReport& r) {
  std::ostringstream out;
  out << "key,value\n";
  out << "hypoelliptic," << (r.hypoelliptic ? "true" : "false") << "\n";
  out << "kalman_rank," << r.kalman_rank << "\n";
  out << "p,";
  for (std::size_t i = 0; i < r.p.size(); ++i)
    out << (i ? " " : "") << r.p[i];
  out << "\n";
  out << "d0_structural," << r.d0_structural << "\n";
  out << "trace_B," << csv_number(r.trace_B) << "\n";
  out << "trace_ok," << (r.trace_ok ? "true" : "false") << "\n";
  out << "spectral_abscissa," << csv_number(r.L0) << "\n";
  return out.str();
}

std::string dimensions_csv(const DimensionReport& r) {
  std::ostringstream out;
  out << "key,value\n";
  out << "D0_structural," << r.D0_structural << "\n";
  out << "D0_fitted," << csv_number(r.D0_fitted) << "\n";
  out << "Dinf_kind," << dinf_kind_name(r.Dinf.kind) << "\n";
  out << "Dinf_value," << csv_number(r.Dinf.value) << "\n";
  out << "Dinf_fit_residual," << csv_number(r.Dinf.residual) << "\n";
  out << "Dinf_t_max_used," << csv_number(r.Dinf.t_max_used) << "\n";
  out << "growth_class," << growth_class_name(r.growth_class) << "\n";
  out << "L0," << csv_number(r.L0) << "\n";
  out << "fit_residual_d0," << csv_number(r.fit_residual_d0) << "\n";
  out << "gamma_D," << csv_number(r.gamma_D) << "\n";
  out << "vol2_gamma," << csv_number(r.vol2_gamma) << "\n";
  return out.str();
}

std::string volume_csv(const std::vector<VolumeRow>& rows,
                       const std::vector<double>& closed_form,
                       const std::vector<double>& rel_err) {
  std::ostringstream out;
  out << "t,V,logt,logV";
  if (!closed_form.empty()) out << ",closed_form,rel_err";
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << csv_number(rows[i].t) << ',' << csv_number(rows[i].V) << ','
        << csv_number(rows[i].log_t) << ',' << csv_number(rows[i].log_V);
    if (!closed_form.empty())
      out << ',' << csv_number(closed_form[i]) << ','
          << csv_number(rel_err[i]);
    out << "\n";
  }
  return out.str();
}

std::string suites_csv(const std::vector<SuiteResult>& rs, bool timing) {
  std::ostringstream out;
  out << "suite,system,description,value,bound,pass,informational";
  if (timing) out << ",runtime_seconds";
  out << "\n";
  for (const SuiteResult& r : rs) {
    for (const CheckRow& c : r.checks) {
      out << r.suite << ',' << r.system << ",\"" << c.description << "\","
          << csv_number(c.value) << ',' << csv_number(c.bound) << ','
          << (c.pass ? "true" : "false") << ','
          << (c.informational ? "true" : "false");
      if (timing) out << ',' << csv_number(r.runtime_seconds);
      out << "\n";
    }
  }
  return out.str();
}

OUSystem system_from_json_file(const std::string& path) {
  const nlohmann::json j = parse_file(path);
  if (!j.is_object()) throw InvalidInput("system file must hold a JSON object");
  if (!j.contains("Q") || !j.contains("B"))
    throw InvalidInput("system file needs Q and B matrices");
  const std::string name =
      j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                  : "custom";
  const Matrix Q = matrix_from_json(j["Q"], "Q");
  const Matrix B = matrix_from_json(j["B"], "B");
  int dim = static_cast<int>(Q.rows());
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer())
      throw InvalidInput("dim must be an integer");
    dim = j["dim"].get<int>();
  }
  return validate(name, dim, Q, B);
}

GaussianExpFn fn_from_json_file(const std::string& path) {
  const nlohmann::json j = parse_file(path);
  if (!j.is_object()) throw InvalidInput("function file must hold a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string() ||
      j["kind"].get<std::string>() != "gaussian-exp")
    throw InvalidInput("function file must declare \"kind\": \"gaussian-exp\"");
  if (!j.contains("M") || !j.contains("b"))
    throw InvalidInput("function file needs M and b");
  GaussianExpFn f;
  f.M = matrix_from_json(j["M"], "M");
  f.b = vector_from_json(j["b"], "b");
  f.c = 0.0;
  if (j.contains("c")) {
    if (!j["c"].is_number()) throw InvalidInput("c must be a number");
    f.c = j["c"].get<double>();
  }
  if (f.M.rows() != f.M.cols())
    throw InvalidInput("M must be square");
  if (f.b.size() != f.M.rows())
    throw InvalidInput("b length must match M");
  if (!f.M.isApprox(f.M.transpose(), 1e-12))
    throw InvalidInput("M must be symmetric");
  return f;
}

}  // namespace ouk

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ouk/dimensions.hpp"
#include "ouk/kernel.hpp"
#include "ouk/suites.hpp"
#include "ouk/system.hpp"

namespace ouk {

/// Fixed 17-significant-digit decimal form of v; shortest round-trippable
/// representation is deliberately not used so that output bytes depend only
/// on the value.
std::string format_double(double v);

/// Insertion-ordered JSON document tree. Numbers print through
/// format_double, non-finite values print as the quoted strings "inf",
/// "-inf", "nan"; field order is exactly insertion order, which makes the
/// serialized bytes a pure function of the data.
struct JValue {
  enum class Kind { null, boolean, integer, number, string, array, object };
  Kind kind = Kind::null;
  bool bval = false;
  long long ival = 0;
  double nval = 0.0;
  std::string sval;
  std::vector<JValue> items;
  std::vector<std::pair<std::string, JValue>> fields;

  static JValue boolean(bool v);
  static JValue integer(long long v);
  static JValue number(double v);
  static JValue str(std::string v);
  static JValue array();
  static JValue object();

  JValue& push(JValue v);
  JValue& set(const std::string& key, JValue v);
  std::string dump(int indent = 2) const;
};

JValue to_jvalue(const StructureReport& r);
JValue to_jvalue(const DimensionReport& r);
JValue to_jvalue(const SuiteResult& r, bool timing);

/// Volume table; closed-form and relative-error columns appear when the
/// vectors are non-empty (they must then match rows in length).
JValue volume_to_jvalue(const std::vector<VolumeRow>& rows,
                        const std::vector<double>& closed_form,
                        const std::vector<double>& rel_err);

std::string structure_csv(const StructureReport& r);
std::string dimensions_csv(const DimensionReport& r);
std::string volume_csv(const std::vector<VolumeRow>& rows,
                       const std::vector<double>& closed_form,
                       const std::vector<double>& rel_err);
std::string suites_csv(const std::vector<SuiteResult>& rs, bool timing);

/// Reads {"name": ..., "dim": ..., "Q": [[...]], "B": [[...]]} and
/// validates it like a built-in definition.
OUSystem system_from_json_file(const std::string& path);

/// Reads {"kind": "gaussian-exp", "M": [[...]], "b": [...], "c": ...}.
GaussianExpFn fn_from_json_file(const std::string& path);

}  // namespace ouk

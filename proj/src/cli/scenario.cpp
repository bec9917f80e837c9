#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "desitter/cli.hpp"
#include "desitter/errors.hpp"

namespace desitter::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  return j;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

template <std::size_t N>
Vector<N> vector_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != N) {
    throw ConfigError(where + " must be an array of " + std::to_string(N) + " numbers");
  }
  Vector<N> v;
  for (std::size_t i = 0; i < N; ++i) v[i] = number(j[i], where + "[" + std::to_string(i) + "]");
  if (!v.all_finite()) throw ConfigError(where + " must be finite");
  return v;
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) throw ConfigError(where + " must be a positive integer");
  return static_cast<std::size_t>(j.get<long long>());
}

void parse_integrator(const json& j, IntegratorConfig& cfg) {
  require_object(j, "integrator");
  reject_unknown(j, {"method", "step", "abs_tol", "rel_tol", "s_span", "max_steps", "constraint_projection"},
                 "integrator");
  if (j.contains("method")) {
    const std::string m = j["method"].is_string() ? j["method"].get<std::string>() : "";
    if (m == "rk4") {
      cfg.method = Method::Rk4;
    } else if (m == "dopri45") {
      cfg.method = Method::DormandPrince45;
    } else {
      throw ConfigError("integrator.method must be \"rk4\" or \"dopri45\"");
    }
  }
  if (j.contains("step")) cfg.step = number(j["step"], "integrator.step");
  if (j.contains("abs_tol")) cfg.abs_tol = number(j["abs_tol"], "integrator.abs_tol");
  if (j.contains("rel_tol")) cfg.rel_tol = number(j["rel_tol"], "integrator.rel_tol");
  if (j.contains("s_span")) {
    const Vector<2> span = vector_of<2>(j["s_span"], "integrator.s_span");
    cfg.s0 = span[0];
    cfg.s1 = span[1];
  }
  if (j.contains("max_steps")) cfg.max_steps = count(j["max_steps"], "integrator.max_steps");
  if (j.contains("constraint_projection")) {
    if (!j["constraint_projection"].is_boolean()) {
      throw ConfigError("integrator.constraint_projection must be a boolean");
    }
    cfg.constraint_projection = j["constraint_projection"].get<bool>();
  }
}

Mode mode_of(const std::string& s) {
  if (s == "intrinsic") return Mode::Intrinsic;
  if (s == "bulk") return Mode::Bulk;
  if (s == "both") return Mode::Both;
  throw ConfigError("mode must be intrinsic, bulk or both");
}

Format format_of(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("format must be csv or json");
}

}  // namespace

Mode parse_mode(const std::string& s) { return mode_of(s); }
Format parse_format(const std::string& s) { return format_of(s); }

ChartState Scenario::chart_state() const {
  if (chart_initial) return *chart_initial;
  return bulk_to_chart(*bulk_initial, ell);
}

BulkState Scenario::bulk_state() const {
  if (bulk_initial) return *bulk_initial;
  return chart_to_bulk(*chart_initial);
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  require_object(j, "scenario");
  reject_unknown(j,
                 {"ell", "mass", "mode", "initial", "integrator", "null_tolerance", "external_acceleration",
                  "outputs", "sweep", "description"},
                 "scenario");

  Scenario sc;
  if (j.contains("ell")) sc.ell = number(j["ell"], "ell");
  if (j.contains("mass")) sc.mass = number(j["mass"], "mass");
  if (!(sc.ell > 0.0) || !std::isfinite(sc.ell)) throw ConfigError("ell must be a positive number");
  if (!(sc.mass > 0.0) || !std::isfinite(sc.mass)) throw ConfigError("mass must be a positive number");
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) throw ConfigError("mode must be a string");
    sc.mode = mode_of(j["mode"].get<std::string>());
    sc.mode_given = true;
  }

  if (!j.contains("initial")) throw ConfigError("scenario needs an initial state");
  const json& init = require_object(j["initial"], "initial");
  reject_unknown(init, {"chart", "bulk"}, "initial");
  if (init.contains("chart") == init.contains("bulk")) {
    throw ConfigError("initial must contain exactly one of 'chart' or 'bulk'");
  }
  if (init.contains("chart")) {
    const json& c = require_object(init["chart"], "initial.chart");
    reject_unknown(c, {"x", "u"}, "initial.chart");
    if (!c.contains("x") || !c.contains("u")) throw ConfigError("initial.chart needs x and u");
    sc.chart_initial = ChartState{{vector_of<4>(c["x"], "initial.chart.x"), sc.ell},
                                  vector_of<4>(c["u"], "initial.chart.u")};
  } else {
    const json& b = require_object(init["bulk"], "initial.bulk");
    reject_unknown(b, {"X", "V"}, "initial.bulk");
    if (!b.contains("X") || !b.contains("V")) throw ConfigError("initial.bulk needs X and V");
    sc.bulk_initial = BulkState{vector_of<5>(b["X"], "initial.bulk.X"), vector_of<5>(b["V"], "initial.bulk.V")};
  }

  if (j.contains("integrator")) parse_integrator(j["integrator"], sc.integrator);
  if (j.contains("null_tolerance")) {
    sc.null_tolerance = number(j["null_tolerance"], "null_tolerance");
    if (!(sc.null_tolerance >= 0.0)) throw ConfigError("null_tolerance must be non-negative");
  }
  if (j.contains("external_acceleration")) {
    sc.external_acceleration = vector_of<4>(j["external_acceleration"], "external_acceleration");
  }
  if (j.contains("outputs")) {
    const json& o = require_object(j["outputs"], "outputs");
    reject_unknown(o, {"format", "every"}, "outputs");
    if (o.contains("format")) {
      if (!o["format"].is_string()) throw ConfigError("outputs.format must be a string");
      sc.format = format_of(o["format"].get<std::string>());
    }
    if (o.contains("every")) sc.output_every = count(o["every"], "outputs.every");
  }
  if (j.contains("sweep")) {
    const json& s = require_object(j["sweep"], "sweep");
    reject_unknown(s, {"parameter", "values"}, "sweep");
    if (!s.contains("parameter") || !s["parameter"].is_string()) {
      throw ConfigError("sweep.parameter must be one of step, ell, s_span");
    }
    Sweep sw;
    const std::string p = s["parameter"].get<std::string>();
    if (p == "step") {
      sw.parameter = SweepParameter::Step;
    } else if (p == "ell") {
      sw.parameter = SweepParameter::Ell;
    } else if (p == "s_span") {
      sw.parameter = SweepParameter::SSpan;
    } else {
      throw ConfigError("sweep.parameter must be one of step, ell, s_span");
    }
    if (!s.contains("values") || !s["values"].is_array() || s["values"].empty()) {
      throw ConfigError("sweep.values must be a non-empty array");
    }
    for (std::size_t i = 0; i < s["values"].size(); ++i) {
      const double v = number(s["values"][i], "sweep.values[" + std::to_string(i) + "]");
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sweep values must be positive and finite");
      sw.values.push_back(v);
    }
    sc.sweep = sw;
  }

  try {
    sc.integrator.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("integrator: ") + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace desitter::cli

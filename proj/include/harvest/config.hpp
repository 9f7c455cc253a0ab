#pragma once

// Scenario configuration: strict JSON schema (unknown keys are errors).

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "harvest/cavity_oracle.hpp"
#include "harvest/correlators.hpp"
#include "harvest/detector.hpp"
#include "harvest/optimize.hpp"
#include "harvest/records.hpp"

namespace harvest {

inline constexpr int kSchemaVersion = 1;

enum class RunKind { Rho, Negativity, Sweep, Covariance, Oracle, Optimize };

inline const char* to_string(RunKind k) {
  switch (k) {
    case RunKind::Rho: return "rho";
    case RunKind::Negativity: return "negativity";
    case RunKind::Sweep: return "sweep";
    case RunKind::Covariance: return "covariance";
    case RunKind::Oracle: return "oracle";
    case RunKind::Optimize: return "optimize";
  }
  return "?";
}

struct Tolerances {
  double quad_rel = 1e-8;
  double boost_abs = 1e-6;
};

struct SweepSpec {
  std::string param_path;
  std::vector<double> values;
};

struct OracleSpec {
  int fock_cutoff = 3;
  double time_step = 0.01;
  int integrator_order = 4;
  std::vector<double> lambdas{0.03, 0.01, 0.003};
  bool convergence = false;
};

struct ScenarioConfig {
  RunKind run_kind = RunKind::Negativity;
  FieldStateSpec field;
  DetectorConfig a, b;
  std::vector<FrameSpec> frames{FrameSpec{}};
  Tolerances tolerances;
  std::optional<SweepSpec> sweep;
  OracleSpec oracle;
  OptimizationProblem optimization;
  std::string output_path = "harvestlab_out.ndjson";
  json normalized;  // fully populated document the hash is taken over
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

inline double get_num(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v.get<std::string>(), &pos);
      if (pos == v.get<std::string>().size()) return x;
    } catch (const std::exception&) {
    }
  }
  throw ValidationError(where + "." + key + " must be a number");
}

inline int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) throw ValidationError(where + "." + key + " must be an integer");
  return obj.at(key).get<int>();
}

inline FieldKind parse_field_kind(const std::string& s) {
  for (auto k : {FieldKind::MinkowskiVacuum3p1Massless, FieldKind::MinkowskiVacuum1p1Massive,
                 FieldKind::Thermal3p1Massless, FieldKind::CavityVacuum1p1})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown field kind '" + s + "'");
}

inline RunKind parse_run_kind(const std::string& s) {
  for (auto k : {RunKind::Rho, RunKind::Negativity, RunKind::Sweep, RunKind::Covariance, RunKind::Oracle,
                 RunKind::Optimize})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown run_kind '" + s + "'");
}

inline FieldStateSpec parse_field(const json& j, json& norm) {
  check_keys(j, "field", {"kind", "mass", "temperature", "cavity_length", "n_modes", "epsilon"});
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ValidationError("field.kind is required");
  FieldStateSpec f;
  f.kind = parse_field_kind(j.at("kind").get<std::string>());
  f.mass = get_num(j, "mass", f.mass, "field");
  f.temperature = get_num(j, "temperature", f.temperature, "field");
  f.cavity_length = get_num(j, "cavity_length", f.cavity_length, "field");
  f.n_modes = get_int(j, "n_modes", f.n_modes, "field");
  f.epsilon = get_num(j, "epsilon", f.epsilon, "field");
  f.validate();
  norm = {{"kind", to_string(f.kind)}, {"mass", f.mass}, {"temperature", f.temperature},
          {"cavity_length", f.cavity_length}, {"n_modes", f.n_modes}, {"epsilon", f.epsilon}};
  return f;
}

inline DetectorConfig parse_detector(const json& j, DetectorLabel label, json& norm) {
  const std::string where = std::string("detectors[") + to_string(label) + "]";
  check_keys(j, where, {"label", "gap", "coupling", "position", "smearing_width", "switching_width",
                        "switching_center", "initial"});
  DetectorConfig d;
  d.label = label;
  if (j.contains("label") && j.at("label").get<std::string>() != to_string(label))
    throw ValidationError(where + ".label must be '" + to_string(label) + "' (detectors are ordered A, B)");
  d.gap = get_num(j, "gap", d.gap, where);
  d.coupling = get_num(j, "coupling", d.coupling, where);
  if (j.contains("position")) {
    const json& p = j.at("position");
    if (!p.is_array() || p.empty() || p.size() > 3)
      throw ValidationError(where + ".position must be an array of 1 to 3 numbers");
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (!p[c].is_number()) throw ValidationError(where + ".position entries must be numbers");
      d.position[c] = p[c].get<double>();
    }
  }
  d.smearing_width = get_num(j, "smearing_width", d.smearing_width, where);
  d.switching_width = get_num(j, "switching_width", d.switching_width, where);
  d.switching_center = get_num(j, "switching_center", d.switching_center, where);
  double alpha = 0.0, beta = 0.0, p = 0.0;
  if (j.contains("initial")) {
    const json& ini = j.at("initial");
    check_keys(ini, where + ".initial", {"alpha", "beta", "p"});
    alpha = get_num(ini, "alpha", 0.0, where + ".initial");
    beta = get_num(ini, "beta", 0.0, where + ".initial");
    p = get_num(ini, "p", 0.0, where + ".initial");
  }
  d.initial = InitialStateSpec(PureStateAngles(alpha, beta), p);
  d.validate();
  norm = {{"label", to_string(label)},
          {"gap", d.gap},
          {"coupling", d.coupling},
          {"position", {d.position[0], d.position[1], d.position[2]}},
          {"smearing_width", d.smearing_width},
          {"switching_width", d.switching_width},
          {"switching_center", d.switching_center},
          {"initial", {{"alpha", alpha}, {"beta", beta}, {"p", p}}}};
  return d;
}

/// Resolves "a.b.0.c" inside `doc`; returns nullptr when absent.
inline json* resolve_path(json& doc, const std::string& path) {
  json* cur = &doc;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (cur->is_object()) {
      if (!cur->contains(part)) return nullptr;
      cur = &(*cur)[part];
    } else if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t pos = 0;
        idx = std::stoul(part, &pos);
        if (pos != part.size()) return nullptr;
      } catch (const std::exception&) {
        return nullptr;
      }
      if (idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else {
      return nullptr;
    }
  }
  return cur;
}

}  // namespace detail

/// Parses and validates; `normalized` holds every field with defaults
/// filled in.
inline ScenarioConfig parse_config(const json& doc) {
  using namespace detail;
  check_keys(doc, "config", {"schema_version", "run_kind", "field", "detectors", "frames", "tolerances", "sweep",
                             "oracle", "optimize", "output_path"});
  if (!doc.contains("schema_version")) throw ValidationError("schema_version is required");
  if (get_int(doc, "schema_version", 0, "config") != kSchemaVersion)
    throw ValidationError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  ScenarioConfig c;
  json norm;
  norm["schema_version"] = kSchemaVersion;
  if (doc.contains("run_kind")) c.run_kind = parse_run_kind(doc.at("run_kind").get<std::string>());
  norm["run_kind"] = to_string(c.run_kind);

  if (!doc.contains("field")) throw ValidationError("field is required");
  c.field = parse_field(doc.at("field"), norm["field"]);

  if (!doc.contains("detectors") || !doc.at("detectors").is_array())
    throw ValidationError("detectors must be an array of exactly two detectors");
  if (doc.at("detectors").size() != 2)
    throw ValidationError("exactly two detectors are required, got " + std::to_string(doc.at("detectors").size()));
  json dn = json::array();
  json tmp;
  c.a = parse_detector(doc.at("detectors")[0], DetectorLabel::A, tmp);
  dn.push_back(tmp);
  c.b = parse_detector(doc.at("detectors")[1], DetectorLabel::B, tmp);
  dn.push_back(tmp);
  norm["detectors"] = dn;

  if (doc.contains("frames")) {
    const json& fr = doc.at("frames");
    if (!fr.is_array() || fr.empty()) throw ValidationError("frames must be a non-empty array");
    c.frames.clear();
    for (const auto& f : fr) {
      check_keys(f, "frames[]", {"v", "label"});
      c.frames.emplace_back(get_num(f, "v", 0.0, "frames[]"), f.value("label", std::string{}));
    }
  }
  norm["frames"] = json::array();
  for (const auto& f : c.frames) norm["frames"].push_back({{"v", f.v}, {"label", f.label}});
  for (const auto& f : c.frames)
    if (f.v != 0.0 && c.field.spatial_dims() != 1)
      throw ValidationError("boosted frames require a 1+1D field state");

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    check_keys(t, "tolerances", {"quad_rel", "boost_abs"});
    c.tolerances.quad_rel = get_num(t, "quad_rel", c.tolerances.quad_rel, "tolerances");
    c.tolerances.boost_abs = get_num(t, "boost_abs", c.tolerances.boost_abs, "tolerances");
  }
  if (!(c.tolerances.quad_rel > 0.0) || !(c.tolerances.boost_abs > 0.0))
    throw ValidationError("tolerance values must be positive");
  norm["tolerances"] = {{"quad_rel", c.tolerances.quad_rel}, {"boost_abs", c.tolerances.boost_abs}};

  if (doc.contains("oracle")) {
    const json& o = doc.at("oracle");
    check_keys(o, "oracle", {"fock_cutoff", "time_step", "integrator_order", "lambdas", "convergence"});
    c.oracle.fock_cutoff = get_int(o, "fock_cutoff", c.oracle.fock_cutoff, "oracle");
    c.oracle.time_step = get_num(o, "time_step", c.oracle.time_step, "oracle");
    c.oracle.integrator_order = get_int(o, "integrator_order", c.oracle.integrator_order, "oracle");
    if (o.contains("lambdas")) c.oracle.lambdas = o.at("lambdas").get<std::vector<double>>();
    if (o.contains("convergence")) c.oracle.convergence = o.at("convergence").get<bool>();
  }
  if (c.run_kind == RunKind::Oracle && c.field.kind != FieldKind::CavityVacuum1p1)
    throw ValidationError("run_kind 'oracle' requires the cavity_vacuum_1p1 field");
  norm["oracle"] = {{"fock_cutoff", c.oracle.fock_cutoff}, {"time_step", c.oracle.time_step},
                    {"integrator_order", c.oracle.integrator_order}, {"lambdas", c.oracle.lambdas},
                    {"convergence", c.oracle.convergence}};

  if (doc.contains("optimize")) {
    const json& o = doc.at("optimize");
    check_keys(o, "optimize", {"free_params", "budget", "seed", "objective"});
    if (o.contains("objective") && o.at("objective") != "negativity_closed_form")
      throw ValidationError("optimize.objective must be 'negativity_closed_form'");
    c.optimization.budget = get_int(o, "budget", c.optimization.budget, "optimize");
    c.optimization.seed = std::uint64_t(get_int(o, "seed", 0, "optimize"));
    if (o.contains("free_params"))
      for (const auto& fp : o.at("free_params")) {
        check_keys(fp, "optimize.free_params[]", {"name", "lower", "upper"});
        c.optimization.free_params.push_back({param_from_string(fp.at("name").get<std::string>()),
                                              get_num(fp, "lower", 0.0, "free_params"),
                                              get_num(fp, "upper", 0.0, "free_params")});
      }
  }
  if (c.run_kind == RunKind::Optimize) c.optimization.validate();
  {
    json fps = json::array();
    for (const auto& f : c.optimization.free_params)
      fps.push_back({{"name", to_string(f.param)}, {"lower", f.lower}, {"upper", f.upper}});
    norm["optimize"] = {{"objective", "negativity_closed_form"}, {"free_params", fps},
                        {"budget", c.optimization.budget}, {"seed", c.optimization.seed}};
  }

  if (doc.contains("output_path")) c.output_path = doc.at("output_path").get<std::string>();

  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    check_keys(s, "sweep", {"param_path", "values"});
    SweepSpec sp;
    sp.param_path = s.at("param_path").get<std::string>();
    sp.values = s.at("values").get<std::vector<double>>();
    json probe = norm;
    json* target = resolve_path(probe, sp.param_path);
    if (!target || !target->is_number())
      throw ValidationError("sweep.param_path '" + sp.param_path + "' does not name a numeric parameter");
    if (sp.values.empty()) throw ValidationError("sweep.values must not be empty");
    c.sweep = sp;
    norm["sweep"] = {{"param_path", sp.param_path}, {"values", sp.values}};
  }
  if (c.run_kind == RunKind::Sweep && !c.sweep) throw ValidationError("run_kind 'sweep' requires a sweep block");
  if (c.run_kind == RunKind::Covariance && c.frames.size() != 2)
    throw ValidationError("run_kind 'covariance' requires exactly two frames (t, s)");

  c.normalized = norm;
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + " is not valid JSON: " + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
}

/// Hash of the normalized document (output location excluded).
inline std::string config_hash(const ScenarioConfig& c) { return hex64(fnv1a(c.normalized.dump())); }

/// Copy of `c` with the sweep parameter set to `value`.
inline ScenarioConfig with_sweep_value(const ScenarioConfig& c, double value) {
  json doc = c.normalized;
  doc.erase("sweep");
  doc["run_kind"] = "negativity";
  *detail::resolve_path(doc, c.sweep->param_path) = value;
  ScenarioConfig out = parse_config(doc);
  out.output_path = c.output_path;
  return out;
}

}  // namespace harvest

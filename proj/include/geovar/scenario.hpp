#pragma once

// Declarative scenarios: a mapping problem (or a solution-family instance),
// named analytic maps, and the checks expected to pass or fail on them.
// Scenarios are read from JSON (schema in docs/scenario-schema.md); the
// built-in registry uses the same format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "geovar/catalog.hpp"
#include "geovar/chart.hpp"
#include "geovar/engine.hpp"
#include "geovar/errors.hpp"
#include "geovar/geometry.hpp"
#include "geovar/helmholtz.hpp"
#include "geovar/inverse.hpp"
#include "geovar/jet.hpp"
#include "geovar/maps.hpp"

namespace geovar {

// ---------------------------------------------------------------------------
// Check catalog.

struct CheckInfo {
  const char* name;
  double tol_dual;
  double tol_fd;
  bool needs_map;
  const char* summary;
};

inline const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> checks = {
      {"geodesic_residual", 1e-8, 1e-5, true, "mapping residual G on prolonged jets of the map"},
      {"harmonic_residual", 1e-8, 1e-5, true, "harmonic-map residual on prolonged jets of the map"},
      {"image_defect", 1e-5, 1e-5, true, "N-geodesic defect of mapped M-geodesics"},
      {"trace_relation", 1e-12, 1e-12, false, "contraction of G vs trace-first assembly, relative"},
      {"euler_lagrange_weighted", 1e-8, 1e-4, false, "EL of sqrt|g| L vs -sqrt|g| harmonic residual"},
      {"euler_lagrange_unweighted", 1e-8, 1e-4, false, "EL of L vs -harmonic residual"},
      {"trace_identity", 1e-8, 1e-5, false, "g^ij Gbar^k_ij + d_l g^kl on the base"},
      {"hp21", 1e-8, 1e-5, false, "HP21 residual on the (x, phi) grid"},
      {"hp22", 1e-8, 1e-5, false, "HP22 residual on the (x, phi) grid"},
      {"hp31", 1e-7, 1e-4, false, "HP31 as printed"},
      {"hp31_symmetrized", 1e-7, 1e-4, false, "HP31 with the symmetrized second connection term"},
      {"hp32", 1e-7, 1e-4, false, "HP32"},
      {"hp33", 1e-7, 1e-4, false, "HP33"},
      {"hp34", 1e-7, 1e-4, false, "HP34"},
      {"riemann_pair", 1e-6, 1e-4, false, "HP32 vs g^ij times the lowered pair-exchange defect"},
      {"pair_symmetry", 1e-6, 1e-4, false, "lowered curvature pair-exchange defect of NGamma"},
      {"fibre_metricity", 1e-8, 1e-5, false, "covariant derivative of h along NGamma"},
      {"helmholtz", 1e-6, 1e-3, false, "Helmholtz conditions of the dynamical form B G"},
      {"helmholtz_energy", 1e-6, 1e-3, false, "Helmholtz conditions of the energy Euler-Lagrange form"},
      {"dependency_hp34", 1e-5, 1e-5, false, "HP34 + x-divergence of HP21"},
      {"dependency_hp33", 1e-6, 1e-6, false, "HP33 - (MGamma HP31 contraction + HP21 terms)"},
      {"s_trace_with_factor", 1e-8, 1e-5, false, "S-trace condition with the 1/n factor"},
      {"s_trace_without_factor", 1e-8, 1e-5, false, "S-trace condition without the 1/n factor"},
      {"conformality", 1e-7, 1e-5, false, "x-derivatives of h proportional to h"},
  };
  return checks;
}

inline const CheckInfo& check_info(const std::string& name) {
  for (const auto& c : check_catalog())
    if (name == c.name) return c;
  throw UnknownCheck("unknown check '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scenario description.

struct MetricSpec {
  std::string type;
  double amplitude = 0.5;
  std::vector<double> coefficients;
};

struct ConnectionOffset {
  std::array<std::size_t, 3> index{};  // (k, i, j)
  double value = 0.0;
};

struct ChartSpec {
  std::string label;
  std::vector<Interval> bounds;
  std::vector<Interval> sample_bounds;  // empty: bounds pulled in by 0.1
  std::optional<MetricSpec> metric;
  std::string connection;  // "levi_civita", "zero"; empty picks levi_civita iff a metric is given
  std::optional<ConnectionOffset> offset;
};

struct MapSpec {
  std::string name;
  std::string type;
  std::vector<Interval> sample_bounds;
  std::vector<std::vector<double>> matrix;
  std::vector<double> vector;  // offset of linear maps, value of constant maps
  double parameter = 0.0;      // tilt, theta or c
};

struct PsiSpec {
  double constant = 0.0;
  std::vector<double> linear;
  std::vector<double> quadratic;
};

struct CheckSpec {
  std::string check;
  std::string map;
  bool expect_pass = true;
  std::optional<double> tol;
  std::optional<double> tol_fd;
  std::string provenance;
  std::size_t samples = 0;  // 0: run setting
  double t_end = 0.3;
  double step = 1e-3;

  std::string label() const { return map.empty() ? check : check + "/" + map; }
  double tolerance(EngineKind k) const {
    const CheckInfo& info = check_info(check);
    if (k == EngineKind::fd) return tol_fd ? *tol_fd : (tol ? std::max(*tol, info.tol_fd) : info.tol_fd);
    return tol ? *tol : info.tol_dual;
  }
};

enum class ScenarioKind { mapping, solution_family };

struct Scenario {
  std::string name;
  std::string description;
  ScenarioKind kind = ScenarioKind::mapping;
  ChartSpec base;
  ChartSpec fibre;
  PsiSpec psi;
  std::vector<MapSpec> maps;
  std::vector<CheckSpec> checks;

  std::size_t base_dim() const { return base.bounds.size(); }
  std::size_t fibre_dim() const { return fibre.bounds.size(); }
};

// ---------------------------------------------------------------------------
// JSON loading.

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& o, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!o.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T field(const json& o, const char* key, const std::string& where) {
  if (!o.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return o.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T field_or(const json& o, const char* key, T fallback, const std::string& where) {
  return o.contains(key) ? field<T>(o, key, where) : fallback;
}

inline std::vector<Interval> parse_bounds(const json& o, const char* key, const std::string& where) {
  const auto raw = field<std::vector<std::vector<double>>>(o, key, where);
  std::vector<Interval> out;
  for (const auto& r : raw) {
    if (r.size() != 2) throw ConfigError(where + "." + key + ": each interval needs [lo, hi]");
    if (!(r[1] > r[0])) throw ConfigError(where + "." + key + ": empty interval");
    out.push_back({r[0], r[1]});
  }
  if (out.empty()) throw ConfigError(where + "." + key + ": dimension 0");
  return out;
}

inline MetricSpec parse_metric(const json& o, const std::string& where) {
  require_keys(o, {"type", "amplitude", "coefficients"}, where);
  MetricSpec m;
  m.type = field<std::string>(o, "type", where);
  static const char* kTypes[] = {"flat", "round_sphere", "gnomonic_sphere", "shear", "conformal_flat", "warped"};
  if (std::find_if(std::begin(kTypes), std::end(kTypes), [&](const char* t) { return m.type == t; }) ==
      std::end(kTypes))
    throw ConfigError(where + ": unknown metric type '" + m.type + "'");
  m.amplitude = field_or<double>(o, "amplitude", 0.5, where);
  m.coefficients = field_or<std::vector<double>>(o, "coefficients", {}, where);
  return m;
}

inline ChartSpec parse_chart(const json& o, const std::string& where, bool metric_allowed) {
  require_keys(o, {"label", "bounds", "sample_bounds", "metric", "connection", "connection_offset"}, where);
  ChartSpec c;
  c.label = field_or<std::string>(o, "label", where, where);
  c.bounds = parse_bounds(o, "bounds", where);
  if (o.contains("sample_bounds")) {
    c.sample_bounds = parse_bounds(o, "sample_bounds", where);
    if (c.sample_bounds.size() != c.bounds.size()) throw ConfigError(where + ": sample_bounds dimension mismatch");
    for (std::size_t k = 0; k < c.bounds.size(); ++k)
      if (c.sample_bounds[k].lo < c.bounds[k].lo || c.sample_bounds[k].hi > c.bounds[k].hi)
        throw ConfigError(where + ": sample_bounds must lie inside bounds");
  }
  if (o.contains("metric")) {
    if (!metric_allowed) throw ConfigError(where + ": metric is fixed by the scenario kind");
    c.metric = parse_metric(o.at("metric"), where + ".metric");
  }
  c.connection = field_or<std::string>(o, "connection", "", where);
  if (!c.connection.empty() && c.connection != "levi_civita" && c.connection != "zero")
    throw ConfigError(where + ": connection must be 'levi_civita' or 'zero'");
  if (c.connection == "levi_civita" && !c.metric && metric_allowed)
    throw ConfigError(where + ": levi_civita connection needs a metric");
  if (o.contains("connection_offset")) {
    const json& off = o.at("connection_offset");
    require_keys(off, {"index", "value"}, where + ".connection_offset");
    const auto idx = field<std::vector<std::size_t>>(off, "index", where + ".connection_offset");
    if (idx.size() != 3) throw ConfigError(where + ".connection_offset.index needs three entries");
    for (auto v : idx)
      if (v >= c.bounds.size()) throw ConfigError(where + ".connection_offset.index out of range");
    c.offset = ConnectionOffset{{idx[0], idx[1], idx[2]}, field<double>(off, "value", where + ".connection_offset")};
  }
  return c;
}

inline MapSpec parse_map(const json& o, const std::string& where) {
  require_keys(o, {"name", "type", "sample_bounds", "matrix", "offset", "value", "tilt", "theta", "c"}, where);
  MapSpec m;
  m.name = field<std::string>(o, "name", where);
  m.type = field<std::string>(o, "type", where);
  m.sample_bounds = parse_bounds(o, "sample_bounds", where);
  if (m.type == "linear") {
    m.matrix = field<std::vector<std::vector<double>>>(o, "matrix", where);
    m.vector = field_or<std::vector<double>>(o, "offset", std::vector<double>(m.matrix.size(), 0.0), where);
  } else if (m.type == "constant") {
    m.vector = field<std::vector<double>>(o, "value", where);
  } else if (m.type == "great_circle") {
    m.parameter = field<double>(o, "tilt", where);
  } else if (m.type == "latitude_circle") {
    m.parameter = field<double>(o, "theta", where);
  } else if (m.type == "bent") {
    m.parameter = field<double>(o, "c", where);
  } else if (m.type != "identity" && m.type != "gnomonic" && m.type != "stereographic" &&
             m.type != "harmonic_quadratic" && m.type != "paraboloid" && m.type != "sine") {
    throw ConfigError(where + ": unknown map type '" + m.type + "'");
  }
  return m;
}

inline CheckSpec parse_check(const json& o, const std::string& where) {
  require_keys(o, {"check", "map", "expect", "tol", "tol_fd", "provenance", "samples", "t_end", "step"}, where);
  CheckSpec c;
  c.check = field<std::string>(o, "check", where);
  const CheckInfo& info = check_info(c.check);
  c.map = field_or<std::string>(o, "map", "", where);
  if (info.needs_map && c.map.empty()) throw ConfigError(where + ": check '" + c.check + "' needs a map");
  if (!info.needs_map && !c.map.empty()) throw ConfigError(where + ": check '" + c.check + "' takes no map");
  const std::string expect = field_or<std::string>(o, "expect", "pass", where);
  if (expect != "pass" && expect != "fail") throw ConfigError(where + ": expect must be 'pass' or 'fail'");
  c.expect_pass = expect == "pass";
  if (o.contains("tol")) c.tol = field<double>(o, "tol", where);
  if (o.contains("tol_fd")) c.tol_fd = field<double>(o, "tol_fd", where);
  if ((c.tol && !(*c.tol > 0.0)) || (c.tol_fd && !(*c.tol_fd > 0.0)))
    throw ConfigError(where + ": tolerances must be positive");
  c.provenance = field_or<std::string>(o, "provenance", "", where);
  c.samples = field_or<std::size_t>(o, "samples", 0, where);
  c.t_end = field_or<double>(o, "t_end", 0.3, where);
  c.step = field_or<double>(o, "step", 1e-3, where);
  if (!(c.step > 0.0) || !(c.t_end > 0.0)) throw ConfigError(where + ": t_end and step must be positive");
  return c;
}

inline Scenario parse_scenario(const json& o, const std::string& where) {
  require_keys(o, {"name", "description", "kind", "base", "fibre", "psi", "maps", "checks"}, where);
  Scenario s;
  s.name = field<std::string>(o, "name", where);
  const std::string at = where + "[" + s.name + "]";
  s.description = field_or<std::string>(o, "description", "", at);
  const std::string kind = field_or<std::string>(o, "kind", "mapping", at);
  if (kind == "mapping") {
    s.kind = ScenarioKind::mapping;
  } else if (kind == "solution_family") {
    s.kind = ScenarioKind::solution_family;
  } else {
    throw ConfigError(at + ": kind must be 'mapping' or 'solution_family'");
  }
  const bool family = s.kind == ScenarioKind::solution_family;
  s.base = parse_chart(o.at("base"), at + ".base", !family);
  s.fibre = parse_chart(o.at("fibre"), at + ".fibre", true);
  if (family) {
    if (!s.fibre.metric) throw ConfigError(at + ": solution_family needs a fibre metric");
    if (!s.base.connection.empty() || s.base.offset) throw ConfigError(at + ".base: connection is fixed by the family");
    if (!s.fibre.connection.empty()) throw ConfigError(at + ".fibre: connection is fixed by the family");
    if (!o.contains("psi")) throw ConfigError(at + ": solution_family needs psi");
    const json& p = o.at("psi");
    require_keys(p, {"constant", "linear", "quadratic"}, at + ".psi");
    s.psi.constant = field_or<double>(p, "constant", 0.0, at + ".psi");
    s.psi.linear = field_or<std::vector<double>>(p, "linear", {}, at + ".psi");
    s.psi.quadratic = field_or<std::vector<double>>(p, "quadratic", {}, at + ".psi");
  } else if (o.contains("psi")) {
    throw ConfigError(at + ": psi is only used by solution_family scenarios");
  }
  if (o.contains("maps"))
    for (const auto& m : o.at("maps")) s.maps.push_back(parse_map(m, at + ".maps"));
  for (const auto& c : field<json>(o, "checks", at)) {
    CheckSpec cs = parse_check(c, at + ".checks");
    if (!cs.map.empty() &&
        std::none_of(s.maps.begin(), s.maps.end(), [&](const MapSpec& m) { return m.name == cs.map; }))
      throw ConfigError(at + ": check '" + cs.check + "' names unknown map '" + cs.map + "'");
    s.checks.push_back(std::move(cs));
  }
  return s;
}

}  // namespace detail

/// Parses a scenario file: {"scenarios": [...]}.
inline std::vector<Scenario> load_scenarios(const std::string& text, const std::string& origin = "config") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  detail::require_keys(doc, {"scenarios"}, origin);
  std::vector<Scenario> out;
  for (const auto& s : detail::field<nlohmann::json>(doc, "scenarios", origin))
    out.push_back(detail::parse_scenario(s, origin));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (out[i].name == out[j].name) throw ConfigError(origin + ": duplicate scenario '" + out[i].name + "'");
  return out;
}

inline std::vector<Scenario> load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenarios(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Instantiation for one engine.

struct NamedMap {
  std::string name;
  Rule rule;
  ChartDomain sample_box;
};

struct ScenarioInstance {
  MappingProblem problem;
  std::optional<MultiplierField> multiplier;
  std::optional<ScalarField> psi;  // solution families only
  std::vector<NamedMap> maps;
  ChartDomain base_sample;
  ChartDomain fibre_sample;

  const NamedMap& map(const std::string& name) const {
    for (const auto& m : maps)
      if (m.name == name) return m;
    throw ConfigError("unknown map '" + name + "'");
  }
  const MultiplierField& require_multiplier() const {
    if (!multiplier) throw MissingMetric("scenario has no multiplier (needs g and h)");
    return *multiplier;
  }
};

namespace detail {

inline MetricField make_metric(const MetricSpec& s, const ChartDomain& d) {
  if (s.type == "flat") return catalog::flat_metric(d);
  if (s.type == "round_sphere") return catalog::round_sphere_metric(d);
  if (s.type == "gnomonic_sphere") return catalog::gnomonic_sphere_metric(d);
  if (s.type == "shear") return catalog::shear_metric(d, s.amplitude);
  if (s.type == "conformal_flat") return catalog::conformal_flat_metric(d, s.coefficients);
  if (s.type == "warped") return catalog::warped_metric(d);
  throw ConfigError("unknown metric type '" + s.type + "'");
}

inline Rule make_map(const MapSpec& s) {
  if (s.type == "identity") return catalog::identity_map();
  if (s.type == "linear") return catalog::linear_map(s.matrix, s.vector);
  if (s.type == "constant") return catalog::constant_map(s.vector);
  if (s.type == "gnomonic") return catalog::gnomonic_map();
  if (s.type == "stereographic") return catalog::stereographic_map();
  if (s.type == "great_circle") return catalog::great_circle_map(s.parameter);
  if (s.type == "latitude_circle") return catalog::latitude_circle_map(s.parameter);
  if (s.type == "harmonic_quadratic") return catalog::harmonic_quadratic_map();
  if (s.type == "paraboloid") return catalog::paraboloid_map();
  if (s.type == "bent") return catalog::bent_map(s.parameter);
  if (s.type == "sine") return catalog::sine_map();
  throw ConfigError("unknown map type '" + s.type + "'");
}

inline ChartDomain chart_of(const ChartSpec& c, const std::string& fallback_label) {
  return ChartDomain(c.bounds, c.label.empty() ? fallback_label : c.label);
}

inline ChartDomain sample_box_of(const ChartSpec& c, const ChartDomain& chart) {
  if (!c.sample_bounds.empty()) return ChartDomain(c.sample_bounds, chart.label() + " samples");
  return chart.shrunk(0.1);
}

inline ConnectionField make_connection(const ChartSpec& c, const ChartDomain& d,
                                       const std::optional<MetricField>& metric, const DerivativeEngine& e) {
  const bool lc = c.connection == "levi_civita" || (c.connection.empty() && metric);
  ConnectionField out = lc ? levi_civita(*metric, e) : ConnectionField::zero(d);
  if (c.offset) out = with_constant_offset(out, c.offset->index[0], c.offset->index[1], c.offset->index[2], c.offset->value);
  return out;
}

}  // namespace detail

inline ScenarioInstance instantiate(const Scenario& s, const DerivativeEngine& engine) {
  ScenarioInstance inst;
  const ChartDomain base = detail::chart_of(s.base, s.name + ":M");
  const ChartDomain fibre = detail::chart_of(s.fibre, s.name + ":N");
  inst.base_sample = detail::sample_box_of(s.base, base);
  inst.fibre_sample = detail::sample_box_of(s.fibre, fibre);
  if (s.kind == ScenarioKind::solution_family) {
    const ScalarField psi = catalog::quadratic_scalar(base, s.psi.constant, s.psi.linear, s.psi.quadratic);
    const MetricField hhat = detail::make_metric(*s.fibre.metric, fibre);
    SolutionFamily fam = construct_solution_family(engine, psi, hhat);
    inst.problem = fam.problem;
    if (s.fibre.offset)
      inst.problem.gamma_n = with_constant_offset(inst.problem.gamma_n, s.fibre.offset->index[0],
                                                  s.fibre.offset->index[1], s.fibre.offset->index[2],
                                                  s.fibre.offset->value);
    inst.multiplier = fam.multiplier;
    inst.psi = psi;
  } else {
    MappingProblem& p = inst.problem;
    p.base = base;
    p.fibre = fibre;
    if (s.base.metric) p.g = detail::make_metric(*s.base.metric, base);
    std::optional<MetricField> h;
    if (s.fibre.metric) h = detail::make_metric(*s.fibre.metric, fibre);
    p.gamma_m = detail::make_connection(s.base, base, p.g, engine);
    p.gamma_n = detail::make_connection(s.fibre, fibre, h, engine);
    if (h) p.h = FibredMetricField::constant_in_base(base, *h);
    p.validate();
    if (p.g && p.h) inst.multiplier = MultiplierField::product(*p.g, *p.h);
  }
  for (const auto& m : s.maps) {
    if (m.sample_bounds.size() != s.base_dim()) throw ConfigError(s.name + ": map '" + m.name + "' sample_bounds dimension");
    inst.maps.push_back({m.name, detail::make_map(m), ChartDomain(m.sample_bounds, m.name + " samples")});
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Running checks.

enum class EngineChoice { dual, fd, both };

struct RunSettings {
  EngineChoice engine = EngineChoice::dual;
  std::uint64_t seed = 20240601;
  std::size_t samples = 100;
  std::size_t grid_per_axis = kDefaultGridPerAxis;
  double fd_step = kDefaultFdStep;
  std::map<std::string, double> tolerance_overrides;  // check name -> tolerance for every engine
};

/// Relative engine-agreement tolerance, |a - b| / max(1, |a|, |b|).
inline constexpr double kEngineAgreementTolerance = 1e-4;

struct CheckResult {
  std::string scenario;
  std::string check;  // check name, with "/map" when the check targets a map
  std::string engine;  // "dual", "fd" or "agreement"
  double residual = 0.0;
  double tolerance = 0.0;
  bool expected_pass = true;
  bool observed_pass = true;
  std::string provenance;
  std::string witness;  // worst sample or error text
  std::size_t samples = 0;

  bool matches() const { return expected_pass == observed_pass; }
  std::string record_check() const { return check + "@" + engine; }
  std::string verdict() const {
    if (matches()) return observed_pass ? "pass" : "fail";
    return observed_pass ? "unexpected-pass" : "unexpected-fail";
  }
};

struct ResidualReport {
  std::string scenario;
  std::vector<CheckResult> results;

  bool all_match() const {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.matches(); });
  }
  std::size_t mismatches() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const CheckResult& r) { return !r.matches(); }));
  }
};

struct CheckOutcome {
  double residual = 0.0;
  std::size_t samples = 0;
  std::string witness;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& a, const std::string& b) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (const std::string* s : {&a, &b}) {
    for (unsigned char c : *s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string point_text(std::span<const double> p) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << ")";
  return os.str();
}

inline double relative_gap(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, std::abs(a[k] - b[k]) / std::max({1.0, std::abs(a[k]), std::abs(b[k])}));
  return worst;
}

/// Running maximum with the point that produced it.
struct Worst {
  double value = 0.0;
  std::string where;
  std::size_t count = 0;
  void offer(double v, std::span<const double> p) {
    if (count++ == 0 || v > value) {
      value = v;
      where = point_text(p);
    }
  }
  CheckOutcome outcome() const { return {value, count, where.empty() ? "" : "worst at " + where}; }
};

template <class F>
CheckOutcome over_grid(const std::vector<std::vector<double>>& grid, F&& per_point) {
  Worst w;
  for (const auto& z : grid) w.offer(per_point(std::span<const double>(z)), z);
  return w.outcome();
}

inline CheckOutcome run_check(const ScenarioInstance& inst, const CheckSpec& c, const DerivativeEngine& e,
                              const RunSettings& settings, const std::string& scenario_name) {
  const MappingProblem& p = inst.problem;
  const std::size_t m = p.m(), n = p.n();
  const std::uint64_t seed = mix_seed(settings.seed, scenario_name, c.label());
  const std::size_t samples = c.samples ? c.samples : settings.samples;
  const std::string& name = c.check;

  auto random_jet_set = [&]() { return random_jets(inst.base_sample, inst.fibre_sample, samples, seed); };
  auto grid = [&]() {
    return grid_points(product_domain(inst.base_sample, inst.fibre_sample), settings.grid_per_axis, seed);
  };

  if (name == "geodesic_residual" || name == "harmonic_residual") {
    const NamedMap& nm = inst.map(c.map);
    Worst w;
    for (const auto& x : sample_points(nm.sample_box, samples, seed)) {
      const JetPoint<double> j = prolong(e, nm.rule, n, x);
      const double r = name == "geodesic_residual" ? max_norm(geodesic_map_residual(p, j))
                                                   : max_norm(harmonic_residual(p, j));
      w.offer(r, x);
    }
    return w.outcome();
  }
  if (name == "image_defect") {
    const NamedMap& nm = inst.map(c.map);
    const std::size_t count = c.samples ? c.samples : 10;
    SampleStream s(seed);
    Worst w;
    std::size_t exited = 0;
    for (std::size_t k = 0; k < count; ++k) {
      GeodesicState s0;
      s0.position = sample_point(nm.sample_box, s);
      std::vector<double> v(m);
      for (auto& vi : v) vi = s.uniform(-1.0, 1.0);
      const Tensor<double> g = p.g ? p.g->at(std::span<const double>(s0.position)) : catalog::flat_metric(p.base).at(std::span<const double>(s0.position));
      double len2 = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) len2 += g(i, j) * v[i] * v[j];
      for (auto& vi : v) vi /= std::sqrt(len2);
      s0.velocity = v;
      const ImageDefect d = geodesic_image_defect(e, p, nm.rule, s0, c.t_end, c.step);
      exited += d.exited ? 1 : 0;
      std::vector<double> ic = s0.position;
      ic.insert(ic.end(), v.begin(), v.end());
      w.offer(d.defect, ic);
    }
    CheckOutcome o = w.outcome();
    if (exited) o.witness += "; " + std::to_string(exited) + " trajectories left the chart early";
    return o;
  }
  if (name == "trace_relation") {
    Worst w;
    for (const auto& j : random_jet_set()) {
      const auto a = harmonic_residual(p, j);
      const auto b = harmonic_residual_direct(p, j);
      w.offer(relative_gap(a, b), j.x);
    }
    return w.outcome();
  }
  if (name == "euler_lagrange_weighted" || name == "euler_lagrange_unweighted") {
    const bool weighted = name == "euler_lagrange_weighted";
    const LagrangianDensity lag = energy_lagrangian(p, weighted);
    Worst w;
    for (const auto& j : random_jet_set()) {
      const std::vector<double> el = euler_lagrange(e, lag, j);
      std::vector<double> target = harmonic_residual(p, j);
      const double wgt = weighted ? volume_weight(p.metric_g(), std::span<const double>(j.x)) : 1.0;
      for (auto& t : target) t = -wgt * t;
      w.offer(relative_gap(el, target), j.x);
    }
    return w.outcome();
  }
  if (name == "trace_identity") {
    Worst w;
    for (const auto& x : sample_points(inst.base_sample, samples, seed))
      w.offer(max_norm(trace_identity_defect(e, p.metric_g(), std::span<const double>(x))), x);
    return w.outcome();
  }
  if (name == "hp21")
    return over_grid(grid(), [&](std::span<const double> z) {
      return max_norm(hp21_residual(e, inst.require_multiplier(), p.gamma_m, z.first(m), z.subspan(m)));
    });
  if (name == "hp22")
    return over_grid(grid(), [&](std::span<const double> z) {
      return max_norm(hp22_residual(e, inst.require_multiplier(), p.gamma_n, z.first(m), z.subspan(m)));
    });
  if (name == "hp31" || name == "hp31_symmetrized" || name == "hp32" || name == "hp33" || name == "hp34")
    return over_grid(grid(), [&](std::span<const double> z) {
      const Hp3Residuals r = hp3x_residuals(e, inst.require_multiplier(), p, z.first(m), z.subspan(m));
      if (name == "hp31") return max_norm(r.hp31);
      if (name == "hp31_symmetrized") return max_norm(r.hp31_symmetrized);
      if (name == "hp32") return max_norm(r.hp32);
      if (name == "hp33") return max_norm(r.hp33);
      return max_norm(r.hp34);
    });
  if (name == "riemann_pair")
    return over_grid(grid(), [&](std::span<const double> z) {
      return hp32_riemann_mismatch(e, inst.require_multiplier(), p, z.first(m), z.subspan(m));
    });
  if (name == "pair_symmetry" || name == "fibre_metricity")
    return over_grid(grid(), [&](std::span<const double> z) {
      const MetricField h = p.metric_h().slice(std::vector<double>(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m)));
      if (name == "pair_symmetry") return lowered_riemann_pair_symmetry_defect(e, h, p.gamma_n, z.subspan(m)).defect;
      return max_norm(metric_compatibility_residual(e, h, p.gamma_n, z.subspan(m)));
    });
  if (name == "helmholtz" || name == "helmholtz_energy") {
    const SourceForm form = name == "helmholtz" ? dynamical_form(inst.require_multiplier(), p)
                                                : euler_lagrange_form(energy_lagrangian(p, false), e);
    const VariationalityVerdict v = variationality_verdict(e, form, samples, seed, c.tolerance(e.kind),
                                                           JetSampling{inst.base_sample, inst.fibre_sample, 1.0});
    return {v.worst, v.samples,
            "sampled evidence; worst " + v.worst_condition + " at x = " + point_text(v.worst_jet.x) +
                ", phi = " + point_text(v.worst_jet.phi)};
  }
  if (name == "dependency_hp34" || name == "dependency_hp33") {
    const auto pts = grid();
    const DependencyReport d = dependency_checks(e, inst.require_multiplier(), p, pts);
    if (name == "dependency_hp34") return {d.hp34_defect, d.points, "worst at " + point_text(d.worst_hp34_point)};
    std::ostringstream os;
    os.precision(3);
    os << "worst at " << point_text(d.worst_hp33_point) << "; without HP21 terms " << std::scientific << d.hp33_bare_defect;
    return {d.hp33_defect, d.points, os.str()};
  }
  if (name == "s_trace_with_factor" || name == "s_trace_without_factor")
    return over_grid(grid(), [&](std::span<const double> z) {
      const STraceDefect d = s_tensor_trace_defect(e, p.metric_g(), p.metric_h(), p.gamma_m, z.first(m), z.subspan(m));
      return max_norm(name == "s_trace_with_factor" ? d.with_factor : d.without_factor);
    });
  if (name == "conformality")
    return over_grid(grid(), [&](std::span<const double> z) {
      return conformality_defect(e, p.metric_h(), z.first(m), z.subspan(m));
    });
  throw UnknownCheck("unknown check '" + name + "'");
}

}  // namespace detail

/// Runs every expected check of s. With EngineChoice::both each check runs
/// under both engines and an agreement record compares the two residuals.
inline ResidualReport run_scenario(const Scenario& s, const RunSettings& settings) {
  for (const auto& c : s.checks) check_info(c.check);
  ResidualReport rep;
  rep.scenario = s.name;
  std::vector<DerivativeEngine> engines;
  if (settings.engine != EngineChoice::fd) engines.push_back(DerivativeEngine::dual());
  if (settings.engine != EngineChoice::dual) engines.push_back(DerivativeEngine::fd(settings.fd_step));

  std::vector<std::optional<ScenarioInstance>> instances;
  std::vector<std::string> instance_errors;
  for (const auto& e : engines) {
    try {
      instances.emplace_back(instantiate(s, e));
      instance_errors.emplace_back();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      instances.emplace_back();
      instance_errors.emplace_back(err.what());
    }
  }

  for (const auto& c : s.checks) {
    std::vector<double> residuals;
    for (std::size_t k = 0; k < engines.size(); ++k) {
      const DerivativeEngine& e = engines[k];
      CheckResult r;
      r.scenario = s.name;
      r.check = c.label();
      r.engine = e.name();
      r.expected_pass = c.expect_pass;
      r.provenance = c.provenance;
      const auto ov = settings.tolerance_overrides.find(c.check);
      r.tolerance = ov != settings.tolerance_overrides.end() ? ov->second : c.tolerance(e.kind);
      try {
        if (!instances[k]) throw ConstructionFailure(instance_errors[k]);
        CheckSpec run = c;
        run.tol = r.tolerance;
        run.tol_fd = r.tolerance;
        const CheckOutcome o = detail::run_check(*instances[k], run, e, settings, s.name);
        r.residual = o.residual;
        r.samples = o.samples;
        r.witness = o.witness;
      } catch (const UnknownCheck&) {
        throw;
      } catch (const Error& err) {
        r.residual = std::numeric_limits<double>::infinity();
        r.witness = std::string("error: ") + err.what();
      }
      r.observed_pass = r.residual < r.tolerance;
      residuals.push_back(r.residual);
      rep.results.push_back(std::move(r));
    }
    if (engines.size() == 2) {
      CheckResult a;
      a.scenario = s.name;
      a.check = c.label();
      a.engine = "agreement";
      a.tolerance = kEngineAgreementTolerance;
      a.provenance = "dual vs finite differences";
      const double x = residuals[0], y = residuals[1];
      a.residual = (std::isfinite(x) && std::isfinite(y))
                       ? std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)})
                       : std::numeric_limits<double>::infinity();
      a.observed_pass = a.residual < a.tolerance;
      rep.results.push_back(std::move(a));
    }
  }
  return rep;
}

}  // namespace geovar

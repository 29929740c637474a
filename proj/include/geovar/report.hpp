#pragma once

// Text and JSON Lines renderings of residual reports.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "json.hpp"

#include "geovar/scenario.hpp"

namespace geovar {

inline nlohmann::ordered_json to_json(const CheckResult& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["check"] = r.record_check();
  // JSON has no infinity; a check that raised reports null.
  if (std::isfinite(r.residual)) {
    j["residual"] = r.residual;
  } else {
    j["residual"] = nullptr;
  }
  j["tolerance"] = r.tolerance;
  j["verdict"] = r.verdict();
  j["provenance"] = r.provenance;
  j["samples"] = r.samples;
  if (!r.witness.empty()) j["witness"] = r.witness;
  return j;
}

inline void write_jsonl(std::ostream& os, const ResidualReport& rep) {
  for (const auto& r : rep.results) os << to_json(r).dump() << '\n';
}

inline std::string format_residual(double v) {
  if (!std::isfinite(v)) return "error";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline void write_text(std::ostream& os, const ResidualReport& rep, bool verbose = false) {
  os << "== " << rep.scenario << " (" << rep.results.size() << " records, " << rep.mismatches()
     << " unexpected)\n";
  for (const auto& r : rep.results) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-16s %-44s residual %-10s tol %.1e", r.verdict().c_str(),
                  r.record_check().c_str(), format_residual(r.residual).c_str(), r.tolerance);
    os << line;
    if (!r.provenance.empty()) os << "  [" << r.provenance << "]";
    os << '\n';
    if ((verbose || !r.matches()) && !r.witness.empty()) os << "      " << r.witness << '\n';
  }
}

}  // namespace geovar

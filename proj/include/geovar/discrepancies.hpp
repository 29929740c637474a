#pragma once

// Oracles for the two places where the source states a formula in two
// incompatible ways:
//  * the S-trace condition, printed once with a 1/n factor and once without;
//  * the trace identity g^ij Gbar^k_ij = -d_l g^kl, which needs det g constant.
// Each row evaluates both readings on a scenario and compares them with the
// closed-form prediction.

#include <cmath>
#include <string>
#include <vector>

#include "geovar/scenario.hpp"

namespace geovar {

struct STraceRow {
  std::string scenario;
  std::size_t m = 0, n = 0;
  double with_factor = 0.0;     // max |.| of the 1/n reading
  double without_factor = 0.0;  // max |.| of the reading without 1/n
  double predicted = 0.0;       // max (n - 1) |psi_{,p} g^{lp}|
  double prediction_gap = 0.0;  // max pointwise |without_factor - (n - 1) psi^l|
  bool consistent = false;      // 1/n reading vanishes and the other matches the prediction
};

struct TraceIdentityRow {
  std::string scenario;
  double defect = 0.0;         // max |g^ij Gbar^k_ij + d_l g^kl|
  double det_variation = 0.0;  // max |d det g|
  bool constant_det = false;
  bool consistent = false;  // defect vanishes exactly when det g is constant
};

struct DiscrepancyReport {
  std::vector<STraceRow> s_trace;
  std::vector<TraceIdentityRow> trace_identity;

  bool consistent() const {
    for (const auto& r : s_trace)
      if (!r.consistent) return false;
    for (const auto& r : trace_identity)
      if (!r.consistent) return false;
    return true;
  }
};

namespace detail {

inline double det_gradient_norm(const DerivativeEngine& e, const MetricField& g, std::span<const double> x) {
  auto det_fn = [&g]<class T>(std::span<const T> z) { return std::vector<T>{determinant(g.at_unchecked(z))}; };
  return max_norm(jacobian(e, det_fn, x).storage());
}

}  // namespace detail

inline DiscrepancyReport run_discrepancies(const std::vector<Scenario>& pool, const DerivativeEngine& e,
                                           const RunSettings& settings) {
  const bool dual = e.kind == EngineKind::dual;
  const double zero_tol = dual ? 1e-8 : 1e-5;
  const double det_tol = dual ? 1e-10 : 1e-6;
  DiscrepancyReport rep;
  for (const auto& s : pool) {
    const ScenarioInstance inst = instantiate(s, e);
    const MappingProblem& p = inst.problem;
    if (!p.g) continue;
    const std::size_t m = p.m(), n = p.n();
    const std::uint64_t seed = detail::mix_seed(settings.seed, s.name, "discrepancies");

    TraceIdentityRow t;
    t.scenario = s.name;
    for (const auto& x : sample_points(inst.base_sample, settings.samples, seed)) {
      const std::span<const double> xs(x);
      t.defect = std::max(t.defect, max_norm(trace_identity_defect(e, *p.g, xs)));
      t.det_variation = std::max(t.det_variation, detail::det_gradient_norm(e, *p.g, xs));
    }
    t.constant_det = t.det_variation < det_tol;
    t.consistent = (t.defect < zero_tol) == t.constant_det;
    rep.trace_identity.push_back(t);

    if (!inst.psi || !p.h) continue;
    STraceRow r;
    r.scenario = s.name;
    r.m = m;
    r.n = n;
    const auto grid = grid_points(product_domain(inst.base_sample, inst.fibre_sample), settings.grid_per_axis, seed);
    for (const auto& z : grid) {
      const std::span<const double> zs(z);
      const STraceDefect d = s_tensor_trace_defect(e, *p.g, *p.h, p.gamma_m, zs.first(m), zs.subspan(m));
      const std::vector<double> dpsi = inst.psi->gradient(e, zs.first(m));
      const Tensor<double> ginv = inverse_metric(*p.g, zs.first(m));
      for (std::size_t l = 0; l < m; ++l) {
        double up = 0.0;
        for (std::size_t q = 0; q < m; ++q) up += ginv(l, q) * dpsi[q];
        const double predicted = (static_cast<double>(n) - 1.0) * up;
        r.with_factor = std::max(r.with_factor, std::abs(d.with_factor[l]));
        r.without_factor = std::max(r.without_factor, std::abs(d.without_factor[l]));
        r.predicted = std::max(r.predicted, std::abs(predicted));
        r.prediction_gap = std::max(r.prediction_gap, std::abs(d.without_factor[l] - predicted));
      }
    }
    r.consistent = r.with_factor < zero_tol && r.prediction_gap < zero_tol * std::max(1.0, r.predicted);
    rep.s_trace.push_back(r);
  }
  return rep;
}

}  // namespace geovar

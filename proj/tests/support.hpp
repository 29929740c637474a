#pragma once

// Shared builders for the test suite.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "geovar/geovar.hpp"

namespace geovar::testing {

inline ChartDomain box(std::size_t dim, double lo, double hi) { return ChartDomain::box(dim, lo, hi, "box"); }

/// Sphere chart with pole margins of 0.1.
inline ChartDomain sphere_chart() {
  using std::numbers::pi;
  return ChartDomain({{0.1, pi - 0.1}, {-pi / 2 + 0.1, pi / 2 - 0.1}}, "S2");
}

/// Flat g on base, constant h on fibre, zero connections.
inline MappingProblem flat_problem(std::size_t m, std::size_t n, double half = 2.0) {
  MappingProblem p;
  p.base = box(m, -half, half);
  p.fibre = box(n, -half, half);
  p.gamma_m = ConnectionField::zero(p.base);
  p.gamma_n = ConnectionField::zero(p.fibre);
  p.g = catalog::flat_metric(p.base);
  p.h = FibredMetricField::constant_in_base(p.base, catalog::flat_metric(p.fibre));
  return p;
}

/// Metric problem with Levi-Civita connections on both sides.
inline MappingProblem metric_problem(const MetricField& g, const MetricField& h,
                                     const DerivativeEngine& e = DerivativeEngine::dual()) {
  MappingProblem p;
  p.base = g.domain();
  p.fibre = h.domain();
  p.gamma_m = levi_civita(g, e);
  p.gamma_n = levi_civita(h, e);
  p.g = g;
  p.h = FibredMetricField::constant_in_base(p.base, h);
  p.validate();
  return p;
}

inline double max_abs(const std::vector<double>& v) { return max_norm(std::span<const double>(v)); }

inline double max_abs_gap(const std::vector<double>& a, const std::vector<double>& b) {
  return max_abs_diff(std::span<const double>(a), std::span<const double>(b));
}

inline const DerivativeEngine kDual = DerivativeEngine::dual();
inline const DerivativeEngine kFd = DerivativeEngine::fd();

}  // namespace geovar::testing

#pragma once

// Analytic metrics, maps and scalar fields used by the built-in scenarios.
// Every rule is a generic lambda, so derivatives of any order are exact under
// the dual engine.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "geovar/chart.hpp"
#include "geovar/errors.hpp"
#include "geovar/geometry.hpp"
#include "geovar/rule.hpp"

namespace geovar::catalog {

namespace detail {

inline void require_dim(const ChartDomain& d, std::size_t dim, const char* what) {
  if (d.dimension() != dim)
    throw ConfigError(std::string(what) + " needs a chart of dimension " + std::to_string(dim) + ", got " +
                      std::to_string(d.dimension()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Metrics.

inline MetricField flat_metric(const ChartDomain& d) {
  const std::size_t n = d.dimension();
  return MetricField(d, Rule([n]<class T>(std::span<const T>) {
                       std::vector<T> g(n * n, T(0.0));
                       for (std::size_t i = 0; i < n; ++i) g[i * n + i] = T(1.0);
                       return g;
                     }));
}

/// Unit sphere in (theta, phi): diag(1, sin^2 theta).
inline MetricField round_sphere_metric(const ChartDomain& d) {
  detail::require_dim(d, 2, "round_sphere");
  return MetricField(d, Rule([]<class T>(std::span<const T> p) {
                       using std::sin;
                       const T s = sin(p[0]);
                       return std::vector<T>{T(1.0), T(0.0), T(0.0), s * s};
                     }));
}

/// Unit sphere in gnomonic coordinates y = (u, v):
/// ((1 + |y|^2) delta_ij - y_i y_j) / (1 + |y|^2)^2.
inline MetricField gnomonic_sphere_metric(const ChartDomain& d) {
  detail::require_dim(d, 2, "gnomonic_sphere");
  return MetricField(d, Rule([]<class T>(std::span<const T> y) {
                       const T q = T(1.0) + y[0] * y[0] + y[1] * y[1];
                       const T w = T(1.0) / (q * q);
                       const T off = -(y[0] * y[1]) * w;
                       return std::vector<T>{(q - y[0] * y[0]) * w, off, off, (q - y[1] * y[1]) * w};
                     }));
}

/// [[1, a], [a, 1 + a^2]] with a = amplitude sin(x1 + x2): det g = 1.
inline MetricField shear_metric(const ChartDomain& d, double amplitude) {
  detail::require_dim(d, 2, "shear");
  return MetricField(d, Rule([amplitude]<class T>(std::span<const T> p) {
                       using std::sin;
                       const T a = amplitude * sin(p[0] + p[1]);
                       return std::vector<T>{T(1.0), a, a, T(1.0) + a * a};
                     }));
}

/// e^{2 c.x} delta.
inline MetricField conformal_flat_metric(const ChartDomain& d, std::vector<double> c) {
  const std::size_t n = d.dimension();
  if (c.size() != n) throw ConfigError("conformal_flat: coefficient count must match the chart dimension");
  return MetricField(d, Rule([n, c]<class T>(std::span<const T> p) {
                       using std::exp;
                       T s(0.0);
                       for (std::size_t k = 0; k < n; ++k) s = s + c[k] * p[k];
                       const T w = exp(2.0 * s);
                       std::vector<T> g(n * n, T(0.0));
                       for (std::size_t i = 0; i < n; ++i) g[i * n + i] = w;
                       return g;
                     }));
}

/// (1 + 0.1 |x|^2) delta + 0.3 w w^T with w_i = sin(x^i + 0.5 i): positive
/// definite, non-diagonal, point-dependent in every component.
inline MetricField warped_metric(const ChartDomain& d) {
  const std::size_t n = d.dimension();
  return MetricField(d, Rule([n]<class T>(std::span<const T> p) {
                       using std::sin;
                       T r2(0.0);
                       std::vector<T> w(n);
                       for (std::size_t k = 0; k < n; ++k) {
                         r2 = r2 + p[k] * p[k];
                         w[k] = sin(p[k] + 0.5 * static_cast<double>(k));
                       }
                       std::vector<T> g(n * n);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           g[i * n + j] = 0.3 * w[i] * w[j] + (i == j ? T(1.0) + 0.1 * r2 : T(0.0));
                       return g;
                     }));
}

// ---------------------------------------------------------------------------
// Maps x -> phi(x).

inline Rule identity_map() {
  return Rule([]<class T>(std::span<const T> x) { return std::vector<T>(x.begin(), x.end()); });
}

/// phi = A x + b, A given row-major with n rows.
inline Rule linear_map(std::vector<std::vector<double>> a, std::vector<double> b) {
  for (const auto& row : a)
    if (row.size() != a.front().size()) throw ConfigError("linear map: ragged matrix");
  if (b.size() != a.size()) throw ConfigError("linear map: offset size must equal the row count");
  return Rule([a, b]<class T>(std::span<const T> x) {
    std::vector<T> y(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (a[r].size() != x.size()) throw DimensionMismatch("linear map input size");
      T s(b[r]);
      for (std::size_t c = 0; c < x.size(); ++c) s = s + a[r][c] * x[c];
      y[r] = s;
    }
    return y;
  });
}

inline Rule constant_map(std::vector<double> value) {
  return Rule([value]<class T>(std::span<const T>) { return std::vector<T>(value.begin(), value.end()); });
}

/// Central projection of the unit sphere from its centre onto the plane X = 1:
/// (theta, phi) -> (tan phi, cot theta / cos phi).
inline Rule gnomonic_map() {
  return Rule([]<class T>(std::span<const T> p) {
    using std::cos;
    using std::sin;
    using std::tan;
    return std::vector<T>{tan(p[1]), cos(p[0]) / (sin(p[0]) * cos(p[1]))};
  });
}

/// Projection from the north pole onto the equatorial plane.
inline Rule stereographic_map() {
  return Rule([]<class T>(std::span<const T> p) {
    using std::cos;
    using std::sin;
    const T st = sin(p[0]);
    const T k = T(1.0) / (T(1.0) - cos(p[0]));
    return std::vector<T>{st * cos(p[1]) * k, st * sin(p[1]) * k};
  });
}

/// Unit-speed great circle through (theta, phi) = (pi/2, 0), tilted by
/// `tilt` out of the equator; valid for |t| < pi/2.
inline Rule great_circle_map(double tilt) {
  return Rule([tilt]<class T>(std::span<const T> t) {
    using std::acos;
    using std::atan;
    using std::cos;
    using std::sin;
    const T x = cos(t[0]);
    const T y = sin(t[0]) * std::cos(tilt);
    const T z = sin(t[0]) * std::sin(tilt);
    return std::vector<T>{acos(z), atan(y / x)};
  });
}

/// t -> (theta0, t): a circle of latitude, a geodesic only on the equator.
inline Rule latitude_circle_map(double theta0) {
  return Rule([theta0]<class T>(std::span<const T> t) { return std::vector<T>{T(theta0), t[0]}; });
}

/// (x, y) -> x^2 - y^2.
inline Rule harmonic_quadratic_map() {
  return Rule([]<class T>(std::span<const T> x) { return std::vector<T>{x[0] * x[0] - x[1] * x[1]}; });
}

/// (x, y) -> x^2 + y^2.
inline Rule paraboloid_map() {
  return Rule([]<class T>(std::span<const T> x) { return std::vector<T>{x[0] * x[0] + x[1] * x[1]}; });
}

/// (x, y) -> (x, y + c x^2).
inline Rule bent_map(double c) {
  return Rule([c]<class T>(std::span<const T> x) { return std::vector<T>{x[0], x[1] + c * x[0] * x[0]}; });
}

/// x -> sin(pi x).
inline Rule sine_map() {
  return Rule([]<class T>(std::span<const T> x) {
    using std::sin;
    return std::vector<T>{sin(std::numbers::pi * x[0])};
  });
}

// ---------------------------------------------------------------------------
// Scalar fields.

/// psi = c + sum a_k x^k + sum b_k (x^k)^2.
inline ScalarField quadratic_scalar(const ChartDomain& d, double c, std::vector<double> a,
                                    std::vector<double> b) {
  const std::size_t m = d.dimension();
  if (a.empty()) a.assign(m, 0.0);
  if (b.empty()) b.assign(m, 0.0);
  if (a.size() != m || b.size() != m) throw ConfigError("psi coefficient count must match the base dimension");
  return ScalarField(d, Rule([c, a, b]<class T>(std::span<const T> x) {
                       T s(c);
                       for (std::size_t k = 0; k < x.size(); ++k) s = s + a[k] * x[k] + b[k] * x[k] * x[k];
                       return std::vector<T>{s};
                     }));
}

}  // namespace geovar::catalog

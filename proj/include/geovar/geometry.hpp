#pragma once

// Metrics, connections and curvature on a single chart.
//
// Index conventions (see docs/conventions.md):
//   metric derivative      dg(k, i, j)      = d_k g_ij
//   connection             G(k, i, j)       = Gamma^k_ij, symmetric in (i, j)
//   metricity residual     Q(k, i, j)       = d_k g_ij - G^l_ki g_lj - G^l_kj g_il
//   curvature              R(s, l, n, a)    = R^s_lna
//       = d_n G^s_la - d_a G^s_ln + G^s_bn G^b_la - G^s_ba G^b_ln

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geovar/chart.hpp"
#include "geovar/engine.hpp"
#include "geovar/errors.hpp"
#include "geovar/rule.hpp"
#include "geovar/tensor.hpp"

namespace geovar {

inline constexpr double kDefaultRegularityFloor = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;

namespace detail {

inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kSymmetryTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// Symmetric covariant 2-tensor given by an evaluation rule on a chart.
class MetricField {
 public:
  MetricField() = default;
  MetricField(ChartDomain domain, Rule components,
              double regularity_floor = kDefaultRegularityFloor)
      : domain_(std::move(domain)),
        components_(std::move(components)),
        floor_(regularity_floor) {}

  const ChartDomain& domain() const { return domain_; }
  std::size_t dimension() const { return domain_.dimension(); }
  double regularity_floor() const { return floor_; }
  const Rule& rule() const { return components_; }

  /// Covariant components g_ij at p. Checks the chart and symmetry.
  template <class T>
  Tensor<T> at(std::span<const T> p) const {
    domain_.require(p, "metric");
    return shape(components_(p));
  }

  /// Unchecked evaluation for points already validated by the caller.
  template <class T>
  Tensor<T> at_unchecked(std::span<const T> p) const {
    return shape(components_(p));
  }

 private:
  template <class T>
  Tensor<T> shape(std::vector<T> flat) const {
    const std::size_t n = dimension();
    if (flat.size() != n * n) throw DimensionMismatch("metric rule output size");
    Tensor<T> g({n, n});
    std::copy(flat.begin(), flat.end(), g.flat().begin());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!detail::nearly_equal(value_of(g(i, j)), value_of(g(j, i))))
          throw SymmetryViolation("metric on '" + domain_.label() + "' is not symmetric");
    return g;
  }

  ChartDomain domain_;
  Rule components_;
  double floor_ = kDefaultRegularityFloor;
};

/// Connection coefficients Gamma^k_ij, flattened as (k, i, j).
class ConnectionField {
 public:
  ConnectionField() = default;
  ConnectionField(ChartDomain domain, Rule coefficients)
      : domain_(std::move(domain)), coefficients_(std::move(coefficients)) {}

  static ConnectionField zero(ChartDomain domain) {
    const std::size_t n = domain.dimension();
    return ConnectionField(std::move(domain), Rule([n]<class T>(std::span<const T>) {
                             return std::vector<T>(n * n * n, T(0.0));
                           }));
  }

  const ChartDomain& domain() const { return domain_; }
  std::size_t dimension() const { return domain_.dimension(); }
  const Rule& rule() const { return coefficients_; }

  template <class T>
  Tensor<T> at(std::span<const T> p) const {
    domain_.require(p, "connection");
    const std::size_t n = dimension();
    std::vector<T> flat = coefficients_(p);
    if (flat.size() != n * n * n) throw DimensionMismatch("connection rule output size");
    Tensor<T> c({n, n, n});
    std::copy(flat.begin(), flat.end(), c.flat().begin());
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (!detail::nearly_equal(value_of(c(k, i, j)), value_of(c(k, j, i))))
            throw SymmetryViolation("connection on '" + domain_.label() +
                                    "' has torsion (not symmetric in lower indices)");
    return c;
  }

 private:
  ChartDomain domain_;
  Rule coefficients_;
};

/// Fibre metric h_{sn}(x, phi): a metric on N that may change between fibres.
/// The rule takes the concatenated point (x, phi).
class FibredMetricField {
 public:
  FibredMetricField() = default;
  FibredMetricField(ChartDomain base, ChartDomain fibre, Rule components,
                    double regularity_floor = kDefaultRegularityFloor)
      : base_(std::move(base)),
        fibre_(std::move(fibre)),
        components_(std::move(components)),
        floor_(regularity_floor) {}

  /// Lifts an x-independent metric on N.
  static FibredMetricField constant_in_base(ChartDomain base, const MetricField& h) {
    const std::size_t m = base.dimension();
    Rule r([m, h]<class T>(std::span<const T> z) { return h.rule()(z.subspan(m)); });
    return FibredMetricField(std::move(base), h.domain(), std::move(r), h.regularity_floor());
  }

  const ChartDomain& base_domain() const { return base_; }
  const ChartDomain& fibre_domain() const { return fibre_; }
  std::size_t base_dimension() const { return base_.dimension(); }
  std::size_t fibre_dimension() const { return fibre_.dimension(); }
  double regularity_floor() const { return floor_; }
  const Rule& rule() const { return components_; }

  /// h_{sn} at the concatenated point z = (x, phi).
  template <class T>
  Tensor<T> at(std::span<const T> z) const {
    const std::size_t m = base_dimension();
    base_.require(z.first(m), "fibred metric (base)");
    fibre_.require(z.subspan(m), "fibred metric (fibre)");
    const std::size_t n = fibre_dimension();
    std::vector<T> flat = components_(z);
    if (flat.size() != n * n) throw DimensionMismatch("fibred metric rule output size");
    Tensor<T> h({n, n});
    std::copy(flat.begin(), flat.end(), h.flat().begin());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!detail::nearly_equal(value_of(h(i, j)), value_of(h(j, i))))
          throw SymmetryViolation("fibred metric is not symmetric");
    return h;
  }

  template <class T>
  Tensor<T> at(std::span<const T> x, std::span<const T> phi) const {
    std::vector<T> z(x.begin(), x.end());
    z.insert(z.end(), phi.begin(), phi.end());
    return at(std::span<const T>(z));
  }

  /// The metric on the fibre over the base point x.
  MetricField slice(std::vector<double> x) const {
    Rule r([x, rule = components_]<class T>(std::span<const T> phi) {
      std::vector<T> z(x.begin(), x.end());
      z.insert(z.end(), phi.begin(), phi.end());
      return rule(std::span<const T>(z));
    });
    return MetricField(fibre_, std::move(r), floor_);
  }

 private:
  ChartDomain base_;
  ChartDomain fibre_;
  Rule components_;
  double floor_ = kDefaultRegularityFloor;
};

/// Scalar function on a chart (for instance the conformal exponent psi).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(ChartDomain domain, Rule value) : domain_(std::move(domain)), value_(std::move(value)) {}

  const ChartDomain& domain() const { return domain_; }
  const Rule& rule() const { return value_; }

  template <class T>
  T at(std::span<const T> p) const {
    domain_.require(p, "scalar field");
    return value_(p).at(0);
  }

  template <class T>
  std::vector<T> gradient(const DerivativeEngine& engine, std::span<const T> p) const {
    domain_.require(p, "scalar field gradient");
    const Tensor<T> j = jacobian(engine, value_, p);
    std::vector<T> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = j(k, 0);
    return out;
  }

 private:
  ChartDomain domain_;
  Rule value_;
};

// ---------------------------------------------------------------------------

template <class T>
Tensor<T> checked_inverse(const Tensor<T>& m, double floor, const std::string& label) {
  const double det = value_of(determinant(m));
  if (!(std::abs(det) >= floor))
    throw SingularMetric("metric on '" + label + "' has |det| = " + std::to_string(std::abs(det)) +
                         " below floor " + std::to_string(floor));
  return inverse(m);
}

/// g^{ij} at p; throws SingularMetric below the regularity floor.
template <class T>
Tensor<T> inverse_metric(const MetricField& g, std::span<const T> p) {
  const Tensor<T> gl = g.at(p);
  return checked_inverse(gl, g.regularity_floor(), g.domain().label());
}

/// d_k g_ij, layout (k, i, j).
template <class T>
Tensor<T> metric_derivative(const DerivativeEngine& engine, const MetricField& g,
                            std::span<const T> p) {
  g.domain().require(p, "metric derivative");
  const std::size_t n = g.dimension();
  if (engine.kind == EngineKind::fd) g.domain().shrunk(engine.stencil_radius()).require(p, "metric derivative stencil");
  auto f = [&g]<class S>(std::span<const S> q) { return g.rule()(q); };
  const Tensor<T> j = jacobian(engine, f, p);  // (k, i*n+j)
  Tensor<T> dg({n, n, n});
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = 0; a < n * n; ++a) dg(k, a / n, a % n) = j(k, a);
  return dg;
}

/// Levi-Civita coefficients: G^k_ij = 1/2 g^kl (d_j g_li + d_i g_lj - d_l g_ij).
template <class T>
Tensor<T> christoffel_from_metric(const DerivativeEngine& engine, const MetricField& g,
                                  std::span<const T> p) {
  const std::size_t n = g.dimension();
  const Tensor<T> ginv = inverse_metric(g, p);
  const Tensor<T> dg = metric_derivative(engine, g, p);
  Tensor<T> gamma({n, n, n});
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        T s(0.0);
        for (std::size_t l = 0; l < n; ++l)
          s = s + ginv(k, l) * (dg(j, l, i) + dg(i, l, j) - dg(l, i, j));
        gamma(k, i, j) = 0.5 * s;
        gamma(k, j, i) = gamma(k, i, j);
      }
  return gamma;
}

/// The Levi-Civita connection of g as a field, differentiated by engine.
inline ConnectionField levi_civita(const MetricField& g, const DerivativeEngine& engine) {
  Rule r([g, engine]<class T>(std::span<const T> p) {
    return christoffel_from_metric(engine, g, p).storage();
  });
  return ConnectionField(g.domain(), std::move(r));
}

/// Gamma + S for a second field S on the same chart.
inline ConnectionField add_connections(const ConnectionField& a, const ConnectionField& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch("add_connections");
  Rule r([ra = a.rule(), rb = b.rule()]<class T>(std::span<const T> p) {
    std::vector<T> x = ra(p);
    const std::vector<T> y = rb(p);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = x[k] + y[k];
    return x;
  });
  return ConnectionField(a.domain(), std::move(r));
}

/// Adds a constant to Gamma^k_ij (and Gamma^k_ji, keeping the field torsion-free).
inline ConnectionField with_constant_offset(const ConnectionField& c, std::size_t k,
                                            std::size_t i, std::size_t j, double offset) {
  const std::size_t n = c.dimension();
  if (k >= n || i >= n || j >= n) throw DimensionMismatch("with_constant_offset index");
  Rule r([rc = c.rule(), n, k, i, j, offset]<class T>(std::span<const T> p) {
    std::vector<T> x = rc(p);
    x[(k * n + i) * n + j] = x[(k * n + i) * n + j] + offset;
    if (i != j) x[(k * n + j) * n + i] = x[(k * n + j) * n + i] + offset;
    return x;
  });
  return ConnectionField(c.domain(), std::move(r));
}

/// Covariant derivative of the metric: d_k g_ij - G^l_ki g_lj - G^l_kj g_il,
/// layout (k, i, j). Vanishes iff the connection is metric for g at p.
template <class T>
Tensor<T> metric_compatibility_residual(const DerivativeEngine& engine, const MetricField& g,
                                        const ConnectionField& gamma, std::span<const T> p) {
  const std::size_t n = g.dimension();
  if (gamma.dimension() != n) throw DimensionMismatch("metric_compatibility_residual");
  const Tensor<T> gl = g.at(p);
  const Tensor<T> dg = metric_derivative(engine, g, p);
  const Tensor<T> c = gamma.at(p);
  Tensor<T> q({n, n, n});
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        T s = dg(k, i, j);
        for (std::size_t l = 0; l < n; ++l) s = s - c(l, k, i) * gl(l, j) - c(l, k, j) * gl(i, l);
        q(k, i, j) = s;
      }
  return q;
}

/// R^s_lna = d_n G^s_la - d_a G^s_ln + G^s_bn G^b_la - G^s_ba G^b_ln,
/// layout (s, l, n, a).
template <class T>
Tensor<T> riemann_tensor(const DerivativeEngine& engine, const ConnectionField& gamma,
                         std::span<const T> p) {
  const std::size_t n = gamma.dimension();
  gamma.domain().require(p, "riemann");
  if (engine.kind == EngineKind::fd)
    gamma.domain().shrunk(engine.stencil_radius()).require(p, "riemann stencil");
  const Tensor<T> c = gamma.at(p);
  auto f = [&gamma]<class S>(std::span<const S> q) { return gamma.rule()(q); };
  const Tensor<T> dc = jacobian(engine, f, p);  // (d, (s*n + l)*n + a)
  auto dgam = [&](std::size_t d, std::size_t s, std::size_t l, std::size_t a) -> const T& {
    return dc(d, (s * n + l) * n + a);
  };
  Tensor<T> r({n, n, n, n});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t nu = 0; nu < n; ++nu)
        for (std::size_t a = 0; a < n; ++a) {
          T v = dgam(nu, s, l, a) - dgam(a, s, l, nu);
          for (std::size_t b = 0; b < n; ++b)
            v = v + c(s, b, nu) * c(b, l, a) - c(s, b, a) * c(b, l, nu);
          r(s, l, nu, a) = v;
        }
  return r;
}

/// R_mlna = h_mb R^b_lna.
template <class T>
Tensor<T> lower_first_index(const Tensor<T>& h, const Tensor<T>& r) {
  const std::size_t n = h.extent(0);
  Tensor<T> out({n, n, n, n});
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t nu = 0; nu < n; ++nu)
        for (std::size_t a = 0; a < n; ++a) {
          T s(0.0);
          for (std::size_t b = 0; b < n; ++b) s = s + h(m, b) * r(b, l, nu, a);
          out(m, l, nu, a) = s;
        }
  return out;
}

struct PairSymmetryReport {
  double defect = 0.0;            // max |R_mlna - R_namL|
  double metricity_residual = 0.0;  // max |nabla h|, for the metric-compatibility precondition
  bool metric_compatible = true;
};

/// Pair-exchange defect of the lowered curvature, R_{mu lambda nu alpha} -
/// R_{nu alpha mu lambda}. Reports the metricity residual as well, since the
/// pair symmetry is only expected for connections compatible with h.
inline PairSymmetryReport lowered_riemann_pair_symmetry_defect(
    const DerivativeEngine& engine, const MetricField& h, const ConnectionField& gamma,
    std::span<const double> p, double metricity_tolerance = 1e-6) {
  const Tensor<double> r = riemann_tensor(engine, gamma, p);
  const Tensor<double> low = lower_first_index(h.at(p), r);
  const std::size_t n = h.dimension();
  PairSymmetryReport rep;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t nu = 0; nu < n; ++nu)
        for (std::size_t a = 0; a < n; ++a)
          rep.defect = std::max(rep.defect, std::abs(low(m, l, nu, a) - low(nu, a, m, l)));
  rep.metricity_residual = max_norm(metric_compatibility_residual(engine, h, gamma, p));
  rep.metric_compatible = rep.metricity_residual < metricity_tolerance;
  return rep;
}

/// g^{ij} Gbar^k_ij + d_l g^{kl}: the defect of the unweighted trace identity
/// for the Levi-Civita connection. Zero when det g is constant.
template <class T>
std::vector<T> trace_identity_defect(const DerivativeEngine& engine, const MetricField& g,
                                     std::span<const T> p) {
  const std::size_t n = g.dimension();
  const Tensor<T> ginv = inverse_metric(g, p);
  const Tensor<T> dg = metric_derivative(engine, g, p);
  const Tensor<T> gamma = christoffel_from_metric(engine, g, p);
  std::vector<T> out(n, T(0.0));
  for (std::size_t k = 0; k < n; ++k) {
    T s(0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s = s + ginv(i, j) * gamma(k, i, j);
    // d_l g^{kl} = -g^{ka} (d_l g_ab) g^{bl}
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) s = s - ginv(k, a) * dg(l, a, b) * ginv(b, l);
    out[k] = s;
  }
  return out;
}

}  // namespace geovar

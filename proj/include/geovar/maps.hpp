#pragma once

// Field equations of maps between manifolds with connections: the
// geodesic-mapping residual, its metric trace (the harmonic-map system), the
// energy Lagrangian and functional, and a geodesic integrator used as an
// independent oracle for the mapping condition.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geovar/chart.hpp"
#include "geovar/engine.hpp"
#include "geovar/errors.hpp"
#include "geovar/geometry.hpp"
#include "geovar/jet.hpp"
#include "geovar/rule.hpp"
#include "geovar/tensor.hpp"

namespace geovar {

/// Maps phi: M -> N between two charts with connections; g on M and h on
/// the fibres are optional and only needed by the metric operations.
struct MappingProblem {
  ChartDomain base;
  ChartDomain fibre;
  ConnectionField gamma_m;
  ConnectionField gamma_n;
  std::optional<MetricField> g;
  std::optional<FibredMetricField> h;

  std::size_t m() const { return base.dimension(); }
  std::size_t n() const { return fibre.dimension(); }

  void validate() const {
    if (gamma_m.dimension() != m()) throw DimensionMismatch("gamma_m does not match the base chart");
    if (gamma_n.dimension() != n()) throw DimensionMismatch("gamma_n does not match the fibre chart");
    if (g && g->dimension() != m()) throw DimensionMismatch("g does not match the base chart");
    if (h && (h->base_dimension() != m() || h->fibre_dimension() != n()))
      throw DimensionMismatch("h does not match the charts");
  }

  const MetricField& metric_g() const {
    if (!g) throw MissingMetric("problem has no base metric g");
    return *g;
  }
  const FibredMetricField& metric_h() const {
    if (!h) throw MissingMetric("problem has no fibre metric h");
    return *h;
  }

  /// Geodesic mappings need dim M <= dim N.
  void require_geodesic_dims() const {
    if (m() > n())
      throw DimensionMismatch("geodesic mapping needs dim(M) <= dim(N), got " + std::to_string(m()) +
                              " > " + std::to_string(n()));
  }
};

namespace detail {

template <class T>
void require_jet_dims(const MappingProblem& p, const JetPoint<T>& j) {
  if (j.m != p.m() || j.n != p.n()) throw DimensionMismatch("jet dimensions do not match the problem");
}

/// G^s_ij without the dimension restriction of geodesic mappings.
template <class T>
Tensor<T> geodesic_tensor(const MappingProblem& p, const JetPoint<T>& j) {
  require_jet_dims(p, j);
  const std::size_t m = p.m(), n = p.n();
  const Tensor<T> gm = p.gamma_m.at(std::span<const T>(j.x));
  const Tensor<T> gn = p.gamma_n.at(std::span<const T>(j.phi));
  Tensor<T> out({n, m, m});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k) {
        T v = j.phi2(s, i, k);
        for (std::size_t l = 0; l < m; ++l) v = v - gm(l, i, k) * j.phi1(s, l);
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) v = v + gn(s, a, b) * j.phi1(a, i) * j.phi1(b, k);
        out(s, i, k) = v;
      }
  return out;
}

}  // namespace detail

/// G^s_ij = phi^s_ij - MGamma^k_ij phi^s_k + NGamma^s_ab phi^a_i phi^b_j,
/// layout (s, i, j). Zero iff the mapping condition holds at the jet.
template <class T>
Tensor<T> geodesic_map_residual(const MappingProblem& p, const JetPoint<T>& j) {
  p.require_geodesic_dims();
  return detail::geodesic_tensor(p, j);
}

/// E_n = g^{ij} h_sn G^s_ij, contracted from the full mapping residual.
template <class T>
std::vector<T> harmonic_residual(const MappingProblem& p, const JetPoint<T>& j) {
  const Tensor<T> gmap = detail::geodesic_tensor(p, j);
  const Tensor<T> ginv = inverse_metric(p.metric_g(), std::span<const T>(j.x));
  const Tensor<T> h = p.metric_h().at(std::span<const T>(j.x), std::span<const T>(j.phi));
  const std::size_t m = p.m(), n = p.n();
  std::vector<T> e(n, T(0.0));
  for (std::size_t nu = 0; nu < n; ++nu)
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k) e[nu] = e[nu] + ginv(i, k) * h(s, nu) * gmap(s, i, k);
  return e;
}

/// The same system assembled trace-first, without forming G^s_ij:
/// h_sn (g^{ij} phi^s_ij - tau^k phi^s_k + NGamma^s_ab g^{ij} phi^a_i phi^b_j)
/// with tau^k = g^{ij} MGamma^k_ij.
template <class T>
std::vector<T> harmonic_residual_direct(const MappingProblem& p, const JetPoint<T>& j) {
  detail::require_jet_dims(p, j);
  const std::size_t m = p.m(), n = p.n();
  const Tensor<T> ginv = inverse_metric(p.metric_g(), std::span<const T>(j.x));
  const Tensor<T> h = p.metric_h().at(std::span<const T>(j.x), std::span<const T>(j.phi));
  const Tensor<T> gm = p.gamma_m.at(std::span<const T>(j.x));
  const Tensor<T> gn = p.gamma_n.at(std::span<const T>(j.phi));
  std::vector<T> tau(m, T(0.0));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t l = 0; l < m; ++l) tau[k] = tau[k] + ginv(i, l) * gm(k, i, l);
  Tensor<T> pull({n, n});  // g^{ij} phi^a_i phi^b_j
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < m; ++l) pull(a, b) = pull(a, b) + ginv(i, l) * j.phi1(a, i) * j.phi1(b, l);
  std::vector<T> inner(n, T(0.0));
  for (std::size_t s = 0; s < n; ++s) {
    T v(0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t l = 0; l < m; ++l) v = v + ginv(i, l) * j.phi2(s, i, l);
    for (std::size_t k = 0; k < m; ++k) v = v - tau[k] * j.phi1(s, k);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) v = v + gn(s, a, b) * pull(a, b);
    inner[s] = v;
  }
  std::vector<T> e(n, T(0.0));
  for (std::size_t nu = 0; nu < n; ++nu)
    for (std::size_t s = 0; s < n; ++s) e[nu] = e[nu] + h(s, nu) * inner[s];
  return e;
}

/// sqrt|det g| at x.
template <class T>
T volume_weight(const MetricField& g, std::span<const T> x) {
  using std::sqrt;
  const T d = determinant(g.at(x));
  return sqrt(value_of(d) < 0.0 ? -d : d);
}

/// L = 1/2 g^{ij} h_ab phi^a_i phi^b_j, optionally times sqrt|det g|.
template <class T>
T energy_density(const MappingProblem& p, const JetPoint<T>& j, bool weighted) {
  detail::require_jet_dims(p, j);
  const std::size_t m = p.m(), n = p.n();
  const std::span<const T> x(j.x);
  const Tensor<T> ginv = inverse_metric(p.metric_g(), x);
  const Tensor<T> h = p.metric_h().at(x, std::span<const T>(j.phi));
  T l(0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) l = l + ginv(i, k) * h(a, b) * j.phi1(a, i) * j.phi1(b, k);
  l = 0.5 * l;
  if (weighted) l = l * volume_weight(p.metric_g(), x);
  return l;
}

/// The pull-back form 1/2 tr(g^{-1} phi1^T h phi1), evaluated through the
/// matrix product instead of the four-index sum.
inline double energy_density_direct(const MappingProblem& p, const JetPoint<double>& j) {
  const std::size_t m = p.m(), n = p.n();
  const Tensor<double> ginv = inverse_metric(p.metric_g(), std::span<const double>(j.x));
  const Tensor<double> h = p.metric_h().at(std::span<const double>(j.x), std::span<const double>(j.phi));
  Tensor<double> pulled({m, m});  // (phi^* h)_ik
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        double hb = 0.0;
        for (std::size_t b = 0; b < n; ++b) hb += h(a, b) * j.phi1(b, k);
        s += j.phi1(a, i) * hb;
      }
      pulled(i, k) = s;
    }
  double tr = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) tr += ginv(k, i) * pulled(i, k);
  return 0.5 * tr;
}

/// Energy Lagrangian of the problem. The weighted variant multiplies by
/// sqrt|det g| so that integration against dx matches the Riemannian volume.
inline LagrangianDensity energy_lagrangian(const MappingProblem& p, bool weighted = false) {
  p.metric_g();
  p.metric_h();
  auto fn = [p, weighted]<class T>(const JetPoint<T>& j) { return energy_density(p, j, weighted); };
  return LagrangianDensity(p.base, p.fibre, fn, weighted ? "weighted energy" : "energy");
}

/// Midpoint-rule integral of the weighted (default) or unweighted energy
/// density of a concrete map over region, per_axis cells along each axis.
inline double energy_functional(const DerivativeEngine& engine, const MappingProblem& p, const Rule& map,
                                const ChartDomain& region, std::size_t per_axis, bool weighted = true) {
  if (region.dimension() != p.m()) throw DimensionMismatch("energy_functional region");
  if (per_axis == 0) throw ConfigError("energy_functional needs at least one cell per axis");
  const std::size_t m = p.m(), n = p.n();
  auto f = [&map]<class S>(std::span<const S> z) { return map(z); };
  double cell = 1.0;
  for (const auto& iv : region.bounds()) cell *= iv.length() / static_cast<double>(per_axis);
  std::vector<std::size_t> idx(m, 0);
  double total = 0.0;
  for (;;) {
    std::vector<double> x(m);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& iv = region.bounds()[k];
      x[k] = iv.lo + (static_cast<double>(idx[k]) + 0.5) * iv.length() / static_cast<double>(per_axis);
    }
    p.base.require(std::span<const double>(x), "energy_functional");
    JetPoint<double> j = JetPoint<double>::zeros(m, n);
    j.x = x;
    j.phi = map(x);
    const Tensor<double> d = jacobian(engine, f, std::span<const double>(x));
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < m; ++i) j.phi1(s, i) = d(i, s);
    total += energy_density(p, j, weighted) * cell;
    std::size_t k = 0;
    while (k < m && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == m) break;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Geodesics.

struct GeodesicState {
  std::vector<double> position;
  std::vector<double> velocity;
  double t = 0.0;
};

struct Trajectory {
  std::vector<GeodesicState> states;
  bool exited = false;       // left the chart before t_end
  std::string exit_message;  // DomainExit text when exited
};

namespace detail {

inline std::vector<double> geodesic_acceleration(const ConnectionField& gamma, const std::vector<double>& x,
                                                 const std::vector<double>& v) {
  const std::size_t d = x.size();
  const Tensor<double> c = gamma.at(std::span<const double>(x));
  std::vector<double> a(d, 0.0);
  for (std::size_t h = 0; h < d; ++h)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) a[h] -= c(h, i, k) * v[i] * v[k];
  return a;
}

}  // namespace detail

/// Classical RK4 for x'' + Gamma(x)(x', x') = 0 with fixed step. The final
/// step is shortened to land on t_end. Leaving the chart ends the trajectory
/// early with exited set; the states computed so far are kept.
inline Trajectory integrate_geodesic(const ConnectionField& gamma, const GeodesicState& s0, double t_end,
                                     double step) {
  if (!(step > 0.0)) throw ConfigError("integrate_geodesic: step must be positive");
  const std::size_t d = gamma.dimension();
  if (s0.position.size() != d || s0.velocity.size() != d) throw DimensionMismatch("integrate_geodesic state");
  gamma.domain().require(std::span<const double>(s0.position), "integrate_geodesic start");
  Trajectory tr;
  tr.states.push_back(s0);
  GeodesicState s = s0;
  auto axpy = [](const std::vector<double>& y, double a, const std::vector<double>& k) {
    std::vector<double> out(y);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * k[i];
    return out;
  };
  while (s.t < t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
    const double dt = std::min(step, t_end - s.t);
    try {
      const auto& x = s.position;
      const auto& v = s.velocity;
      const auto k1x = v;
      const auto k1v = detail::geodesic_acceleration(gamma, x, v);
      const auto k2x = axpy(v, 0.5 * dt, k1v);
      const auto k2v = detail::geodesic_acceleration(gamma, axpy(x, 0.5 * dt, k1x), k2x);
      const auto k3x = axpy(v, 0.5 * dt, k2v);
      const auto k3v = detail::geodesic_acceleration(gamma, axpy(x, 0.5 * dt, k2x), k3x);
      const auto k4x = axpy(v, dt, k3v);
      const auto k4v = detail::geodesic_acceleration(gamma, axpy(x, dt, k3x), k4x);
      GeodesicState next;
      next.position.resize(d);
      next.velocity.resize(d);
      for (std::size_t i = 0; i < d; ++i) {
        next.position[i] = x[i] + dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
        next.velocity[i] = v[i] + dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
      }
      next.t = s.t + dt;
      gamma.domain().require(std::span<const double>(next.position), "integrate_geodesic");
      s = std::move(next);
      tr.states.push_back(s);
    } catch (const DomainExit& e) {
      tr.exited = true;
      tr.exit_message = e.what();
      break;
    }
  }
  return tr;
}

struct ImageDefect {
  double defect = 0.0;        // max |y'' + NGamma(y)(y', y')| along the image
  std::size_t evaluated = 0;  // interior trajectory points used
  bool exited = false;
};

/// Pushes an M-geodesic through map and measures how far the image is from
/// an N-geodesic. Velocities use the engine Jacobian of the map;
/// accelerations are fourth-order second differences of the image positions.
inline ImageDefect geodesic_image_defect(const DerivativeEngine& engine, const MappingProblem& p,
                                         const Rule& map, const GeodesicState& s0, double t_end,
                                         double step) {
  p.require_geodesic_dims();
  const std::size_t m = p.m(), n = p.n();
  const Trajectory tr = integrate_geodesic(p.gamma_m, s0, t_end, step);
  auto f = [&map]<class S>(std::span<const S> z) { return map(z); };
  ImageDefect out;
  out.exited = tr.exited;
  // The image may leave the N chart before the geodesic leaves M.
  std::vector<std::vector<double>> y;
  y.reserve(tr.states.size());
  for (const auto& s : tr.states) {
    std::vector<double> q = map(s.position);
    if (!p.fibre.contains(std::span<const double>(q))) {
      out.exited = true;
      break;
    }
    y.push_back(std::move(q));
  }
  for (std::size_t k = 2; k + 2 < y.size(); ++k) {
    const double dt0 = tr.states[k].t - tr.states[k - 1].t;
    bool uniform = true;  // the final step may be shortened
    for (std::size_t q = k - 1; q < k + 2; ++q)
      uniform = uniform && std::abs(tr.states[q + 1].t - tr.states[q].t - dt0) < 1e-12;
    if (!uniform) continue;
    const auto& s = tr.states[k];
    const Tensor<double> d = jacobian(engine, f, std::span<const double>(s.position));
    std::vector<double> ydot(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t i = 0; i < m; ++i) ydot[a] += d(i, a) * s.velocity[i];
    const Tensor<double> c = p.gamma_n.at(std::span<const double>(y[k]));
    for (std::size_t a = 0; a < n; ++a) {
      double r = (-y[k + 2][a] + 16.0 * y[k + 1][a] - 30.0 * y[k][a] + 16.0 * y[k - 1][a] - y[k - 2][a]) /
                 (12.0 * dt0 * dt0);
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t e = 0; e < n; ++e) r += c(a, b, e) * ydot[b] * ydot[e];
      out.defect = std::max(out.defect, std::abs(r));
    }
    ++out.evaluated;
  }
  return out;
}

}  // namespace geovar

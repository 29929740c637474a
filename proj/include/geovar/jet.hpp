#pragma once

// Jet coordinates of maps phi: M -> N up to order three, source forms and
// first-order Lagrangians on them, and the partial / total derivative
// operators the variationality conditions are assembled from.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "geovar/chart.hpp"
#include "geovar/engine.hpp"
#include "geovar/errors.hpp"
#include "geovar/rule.hpp"
#include "geovar/tensor.hpp"

namespace geovar {

/// Number of flattened coordinates of a third-order jet.
constexpr std::size_t jet_size(std::size_t m, std::size_t n) {
  return m + n + n * m + n * m * m + n * m * m * m;
}

/// (x^i, phi^s, phi^s_i, phi^s_ij, phi^s_ijk). Second and third derivatives
/// are stored in full and must be symmetric in their base indices.
template <class T>
struct JetPoint {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<T> x;
  std::vector<T> phi;
  Tensor<T> phi1;  // (s, i)
  Tensor<T> phi2;  // (s, i, j)
  Tensor<T> phi3;  // (s, i, j, k)

  static JetPoint zeros(std::size_t m, std::size_t n) {
    JetPoint j;
    j.m = m;
    j.n = n;
    j.x.assign(m, T(0.0));
    j.phi.assign(n, T(0.0));
    j.phi1 = Tensor<T>({n, m});
    j.phi2 = Tensor<T>({n, m, m});
    j.phi3 = Tensor<T>({n, m, m, m});
    return j;
  }

  std::vector<T> flatten() const {
    std::vector<T> z;
    z.reserve(jet_size(m, n));
    z.insert(z.end(), x.begin(), x.end());
    z.insert(z.end(), phi.begin(), phi.end());
    for (const auto* t : {&phi1, &phi2, &phi3}) z.insert(z.end(), t->flat().begin(), t->flat().end());
    return z;
  }

  static JetPoint unflatten(std::size_t m, std::size_t n, std::span<const T> z) {
    if (z.size() != jet_size(m, n)) throw DimensionMismatch("jet unflatten");
    JetPoint j = zeros(m, n);
    auto it = z.begin();
    std::copy_n(it, m, j.x.begin());
    it += m;
    std::copy_n(it, n, j.phi.begin());
    it += n;
    for (auto* t : {&j.phi1, &j.phi2, &j.phi3}) {
      std::copy_n(it, t->size(), t->flat().begin());
      it += static_cast<std::ptrdiff_t>(t->size());
    }
    return j;
  }

  /// Rejects jets whose higher derivatives are not symmetric.
  void validate() const {
    auto same = [](const T& a, const T& b) {
      const double u = value_of(a), v = value_of(b);
      return std::abs(u - v) <= 1e-12 * std::max({1.0, std::abs(u), std::abs(v)});
    };
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          if (!same(phi2(s, i, j), phi2(s, j, i)))
            throw InvalidJet("phi2 is not symmetric in its base indices");
          for (std::size_t k = 0; k < m; ++k)
            if (!same(phi3(s, i, j, k), phi3(s, j, i, k)) || !same(phi3(s, i, j, k), phi3(s, i, k, j)))
              throw InvalidJet("phi3 is not totally symmetric in its base indices");
        }
  }
};

/// Innermost values of a jet carried on a dual scalar.
template <class T>
JetPoint<double> jet_values(const JetPoint<T>& j) {
  const std::vector<T> z = j.flatten();
  std::vector<double> v(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) v[k] = value_of(z[k]);
  return JetPoint<double>::unflatten(j.m, j.n, v);
}

/// Lifts a double jet onto scalar type T.
template <class T>
JetPoint<T> jet_cast(const JetPoint<double>& j) {
  const std::vector<double> z = j.flatten();
  std::vector<T> v(z.begin(), z.end());
  return JetPoint<T>::unflatten(j.m, j.n, v);
}

template <class T>
using JetVectorFn = std::function<std::vector<T>(const JetPoint<T>&)>;
template <class T>
using JetScalarFn = std::function<T(const JetPoint<T>&)>;

/// Components E_nu of a second-order source form.
class SourceForm {
 public:
  SourceForm() = default;
  template <class F>
  SourceForm(ChartDomain base, ChartDomain fibre, F components, std::string label = {})
      : base_(std::move(base)), fibre_(std::move(fibre)), fn_(std::move(components)), label_(std::move(label)) {}

  std::size_t base_dim() const { return base_.dimension(); }
  std::size_t fibre_dim() const { return fibre_.dimension(); }
  const ChartDomain& base_domain() const { return base_; }
  const ChartDomain& fibre_domain() const { return fibre_; }
  const std::string& label() const { return label_; }

  template <class T>
  std::vector<T> operator()(const JetPoint<T>& j) const {
    if (j.m != base_dim() || j.n != fibre_dim()) throw DimensionMismatch("source form jet dimensions");
    std::vector<T> e = fn_.template call<T>(j);
    if (e.size() != fibre_dim()) throw DimensionMismatch("source form output size");
    return e;
  }

 private:
  ChartDomain base_;
  ChartDomain fibre_;
  PolyFunction<JetVectorFn, double, D1, D2, D3, D4, D5> fn_;
  std::string label_;
};

/// First-order Lagrangian density L(x, phi, phi1).
class LagrangianDensity {
 public:
  LagrangianDensity() = default;
  template <class F>
  LagrangianDensity(ChartDomain base, ChartDomain fibre, F value, std::string label = {})
      : base_(std::move(base)), fibre_(std::move(fibre)), fn_(std::move(value)), label_(std::move(label)) {}

  std::size_t base_dim() const { return base_.dimension(); }
  std::size_t fibre_dim() const { return fibre_.dimension(); }
  const ChartDomain& base_domain() const { return base_; }
  const ChartDomain& fibre_domain() const { return fibre_; }
  const std::string& label() const { return label_; }

  template <class T>
  T operator()(const JetPoint<T>& j) const {
    if (j.m != base_dim() || j.n != fibre_dim()) throw DimensionMismatch("lagrangian jet dimensions");
    return fn_.template call<T>(j);
  }

 private:
  ChartDomain base_;
  ChartDomain fibre_;
  PolyFunction<JetScalarFn, double, D1, D2, D3, D4, D5> fn_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// Offsets of the flattened jet coordinates.

struct JetLayout {
  std::size_t m, n;
  std::size_t x(std::size_t i) const { return i; }
  std::size_t phi(std::size_t s) const { return m + s; }
  std::size_t phi1(std::size_t s, std::size_t i) const { return m + n + s * m + i; }
  std::size_t phi2(std::size_t s, std::size_t i, std::size_t j) const {
    return m + n + n * m + (s * m + i) * m + j;
  }
  std::size_t phi3(std::size_t s, std::size_t i, std::size_t j, std::size_t k) const {
    return m + n + n * m + n * m * m + ((s * m + i) * m + j) * m + k;
  }
  std::size_t size() const { return jet_size(m, n); }
};

/// Directional derivative of a generic jet function f: JetPoint<S> ->
/// std::vector<S> along a direction in flattened jet coordinates.
template <class T, class F>
std::vector<T> jet_directional(const DerivativeEngine& engine, const F& f, const JetPoint<T>& j,
                               std::span<const T> dir) {
  const std::size_t m = j.m, n = j.n;
  const std::vector<T> z = j.flatten();
  auto g = [&]<class S>(std::span<const S> zz) { return f(JetPoint<S>::unflatten(m, n, zz)); };
  return directional_derivative(engine, g, std::span<const T>(z), dir);
}

template <class T>
struct JetPartials {
  Tensor<T> d0;  // dE_nu / dphi^mu            (nu, mu)
  Tensor<T> d1;  // dE_nu / dphi^mu_l          (nu, mu, l)
  Tensor<T> d2;  // dE_nu / dphi^mu_lp, sym.   (nu, mu, l, p)
};

namespace detail {

/// Partials of an n-vector jet function with respect to phi, phi1 and the
/// symmetric coordinates phi2 (off-diagonal entries take half the derivative
/// along the paired direction).
template <class T, class F>
JetPartials<T> jet_partials_of(const DerivativeEngine& engine, const F& f, const JetPoint<T>& j,
                               std::size_t outputs) {
  const std::size_t m = j.m, n = j.n;
  const JetLayout lay{m, n};
  JetPartials<T> out{Tensor<T>({outputs, n}), Tensor<T>({outputs, n, m}), Tensor<T>({outputs, n, m, m})};
  std::vector<T> dir(lay.size(), T(0.0));
  auto run = [&]() { return jet_directional(engine, f, j, std::span<const T>(dir)); };
  for (std::size_t mu = 0; mu < n; ++mu) {
    dir[lay.phi(mu)] = T(1.0);
    const auto col = run();
    dir[lay.phi(mu)] = T(0.0);
    for (std::size_t a = 0; a < outputs; ++a) out.d0(a, mu) = col[a];
    for (std::size_t l = 0; l < m; ++l) {
      dir[lay.phi1(mu, l)] = T(1.0);
      const auto c1 = run();
      dir[lay.phi1(mu, l)] = T(0.0);
      for (std::size_t a = 0; a < outputs; ++a) out.d1(a, mu, l) = c1[a];
      for (std::size_t p = l; p < m; ++p) {
        dir[lay.phi2(mu, l, p)] = T(1.0);
        dir[lay.phi2(mu, p, l)] = T(1.0);
        const auto c2 = run();
        dir[lay.phi2(mu, l, p)] = T(0.0);
        dir[lay.phi2(mu, p, l)] = T(0.0);
        const double w = (l == p) ? 1.0 : 0.5;
        for (std::size_t a = 0; a < outputs; ++a) {
          out.d2(a, mu, l, p) = w * c2[a];
          out.d2(a, mu, p, l) = out.d2(a, mu, l, p);
        }
      }
    }
  }
  return out;
}

/// Total-derivative direction d_p in flattened coordinates. The fourth-order
/// component is dropped; callers guarantee the differentiated function does
/// not depend on phi3.
template <class T>
std::vector<T> total_direction(const JetPoint<T>& j, std::size_t p) {
  const std::size_t m = j.m, n = j.n;
  const JetLayout lay{m, n};
  std::vector<T> dir(lay.size(), T(0.0));
  dir[lay.x(p)] = T(1.0);
  for (std::size_t s = 0; s < n; ++s) {
    dir[lay.phi(s)] = j.phi1(s, p);
    for (std::size_t i = 0; i < m; ++i) {
      dir[lay.phi1(s, i)] = j.phi2(s, p, i);
      for (std::size_t k = 0; k < m; ++k) dir[lay.phi2(s, i, k)] = j.phi3(s, p, i, k);
    }
  }
  return dir;
}

}  // namespace detail

/// dE_nu/dphi^mu, dE_nu/dphi^mu_l and dE_nu/dphi^mu_lp (symmetrized in l, p).
template <class T>
JetPartials<T> jet_partials(const DerivativeEngine& engine, const SourceForm& e, const JetPoint<T>& j) {
  j.validate();
  auto f = [&e]<class S>(const JetPoint<S>& jj) { return e(jj); };
  return detail::jet_partials_of(engine, f, j, e.fibre_dim());
}

/// Computes the partials with both engines and throws EngineDisagreement
/// when they differ by more than tolerance (relative, floored at 1).
inline JetPartials<double> cross_checked_jet_partials(const SourceForm& e, const JetPoint<double>& j,
                                                      double tolerance = 1e-4,
                                                      double fd_step = kDefaultFdStep) {
  const auto a = jet_partials(DerivativeEngine::dual(), e, j);
  const auto b = jet_partials(DerivativeEngine::fd(fd_step), e, j);
  auto check = [&](const Tensor<double>& u, const Tensor<double>& v, const char* what) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double x = u.flat()[k], y = v.flat()[k];
      if (std::abs(x - y) > tolerance * std::max({1.0, std::abs(x), std::abs(y)}))
        throw EngineDisagreement(std::string("jet partials ") + what + ": dual " + std::to_string(x) +
                                 " vs fd " + std::to_string(y));
    }
  };
  check(a.d0, b.d0, "d0");
  check(a.d1, b.d1, "d1");
  check(a.d2, b.d2, "d2");
  return a;
}

/// d_p f = df/dx^p + phi^s_p df/dphi^s + phi^s_pi df/dphi^s_i + phi^s_pij df/dphi^s_ij
/// for a generic jet function f of order at most two.
template <class T, class F>
std::vector<T> total_derivative(const DerivativeEngine& engine, const F& f, std::size_t p,
                                const JetPoint<T>& j) {
  if (p >= j.m) throw DimensionMismatch("total_derivative direction");
  const std::vector<T> dir = detail::total_direction(j, p);
  return jet_directional(engine, f, j, std::span<const T>(dir));
}

/// Jet of a concrete map x -> phi(x) at x: values and derivatives to order
/// three, computed by the engine (dual numbers give exact derivatives).
inline JetPoint<double> prolong(const DerivativeEngine& engine, const Rule& map, std::size_t fibre_dim,
                                std::span<const double> x) {
  const std::size_t m = x.size(), n = fibre_dim;
  auto f = [&map]<class S>(std::span<const S> z) { return map(z); };
  auto hess_fn = [&]<class S>(std::span<const S> z) { return hessian(engine, f, z).storage(); };
  JetPoint<double> j = JetPoint<double>::zeros(m, n);
  j.x.assign(x.begin(), x.end());
  j.phi = map(x);
  if (j.phi.size() != n) throw DimensionMismatch("prolong: map output size");
  const Tensor<double> d1 = jacobian(engine, f, x);        // (i, s)
  const Tensor<double> d2 = hessian(engine, f, x);         // (i, j, s)
  const Tensor<double> d3 = jacobian(engine, hess_fn, x);  // (k, (i*m + j)*n + s)
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < m; ++i) {
      j.phi1(s, i) = d1(i, s);
      for (std::size_t k = 0; k < m; ++k) {
        j.phi2(s, i, k) = 0.5 * (d2(i, k, s) + d2(k, i, s));
        for (std::size_t l = 0; l < m; ++l) j.phi3(s, i, k, l) = d3(l, (i * m + k) * n + s);
      }
    }
  // Symmetrize third derivatives over the three base indices (exact for
  // dual numbers; removes stencil-order asymmetry for finite differences).
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = i; k < m; ++k)
        for (std::size_t l = k; l < m; ++l) {
          const std::array<std::array<std::size_t, 3>, 6> perms{{{i, k, l}, {i, l, k}, {k, i, l},
                                                                 {k, l, i}, {l, i, k}, {l, k, i}}};
          double avg = 0.0;
          for (const auto& q : perms) avg += j.phi3(s, q[0], q[1], q[2]);
          avg /= 6.0;
          for (const auto& q : perms) j.phi3(s, q[0], q[1], q[2]) = avg;
        }
  return j;
}

inline JetPoint<double> prolong(const DerivativeEngine& engine, const Rule& map, std::size_t fibre_dim,
                                const std::vector<double>& x) {
  return prolong(engine, map, fibre_dim, std::span<const double>(x));
}

/// E_s = dL/dphi^s - d_k (dL/dphi^s_k).
template <class T>
std::vector<T> euler_lagrange(const DerivativeEngine& engine, const LagrangianDensity& lag,
                              const JetPoint<T>& j) {
  const std::size_t m = j.m, n = j.n;
  const JetLayout lay{m, n};
  auto lf = [&lag]<class S>(const JetPoint<S>& jj) { return std::vector<S>{lag(jj)}; };
  // (dL/dphi^s_k) over (s, k) as one vector-valued jet function.
  auto momenta = [&]<class S>(const JetPoint<S>& jj) {
    std::vector<S> out(n * m);
    std::vector<S> dir(lay.size(), S(0.0));
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t k = 0; k < m; ++k) {
        dir[lay.phi1(s, k)] = S(1.0);
        out[s * m + k] = jet_directional(engine, lf, jj, std::span<const S>(dir))[0];
        dir[lay.phi1(s, k)] = S(0.0);
      }
    return out;
  };
  std::vector<T> e(n, T(0.0));
  std::vector<T> dir(lay.size(), T(0.0));
  for (std::size_t s = 0; s < n; ++s) {
    dir[lay.phi(s)] = T(1.0);
    e[s] = jet_directional(engine, lf, j, std::span<const T>(dir))[0];
    dir[lay.phi(s)] = T(0.0);
  }
  for (std::size_t k = 0; k < m; ++k) {
    const std::vector<T> dk = total_derivative(engine, momenta, k, j);
    for (std::size_t s = 0; s < n; ++s) e[s] = e[s] - dk[s * m + k];
  }
  return e;
}

/// The Euler-Lagrange expressions of lag as a source form.
inline SourceForm euler_lagrange_form(const LagrangianDensity& lag, const DerivativeEngine& engine) {
  auto fn = [lag, engine]<class T>(const JetPoint<T>& j) { return euler_lagrange(engine, lag, j); };
  return SourceForm(lag.base_domain(), lag.fibre_domain(), fn, "euler-lagrange(" + lag.label() + ")");
}

/// Seeded random jet: x and phi uniform in the given boxes, derivative
/// coordinates uniform in [-scale, scale], drawn already symmetrized.
inline JetPoint<double> random_jet(const ChartDomain& base, const ChartDomain& fibre, SampleStream& s,
                                   double scale = 1.0) {
  const std::size_t m = base.dimension(), n = fibre.dimension();
  JetPoint<double> j = JetPoint<double>::zeros(m, n);
  j.x = sample_point(base, s);
  j.phi = sample_point(fibre, s);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t i = 0; i < m; ++i) j.phi1(a, i) = s.uniform(-scale, scale);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = i; k < m; ++k) j.phi2(a, i, k) = j.phi2(a, k, i) = s.uniform(-scale, scale);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = i; k < m; ++k)
        for (std::size_t l = k; l < m; ++l) {
          const double v = s.uniform(-scale, scale);
          const std::array<std::array<std::size_t, 3>, 6> perms{{{i, k, l}, {i, l, k}, {k, i, l},
                                                                 {k, l, i}, {l, i, k}, {l, k, i}}};
          for (const auto& q : perms) j.phi3(a, q[0], q[1], q[2]) = v;
        }
  }
  return j;
}

inline std::vector<JetPoint<double>> random_jets(const ChartDomain& base, const ChartDomain& fibre,
                                                 std::size_t count, std::uint64_t seed, double scale = 1.0) {
  SampleStream s(seed);
  std::vector<JetPoint<double>> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_jet(base, fibre, s, scale));
  return out;
}

}  // namespace geovar

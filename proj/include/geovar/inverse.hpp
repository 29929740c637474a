#pragma once

// Weak inverse problem for the geodesic-mapping equations: multipliers
// B^{ij}_{sn}(x, phi), the dynamical form E_n = B^{ij}_{sn} G^s_ij, the split
// conditions HP21/HP22 and HP31-HP34, the S-tensor trace condition, and a
// constructor for a family of exact solutions.
//
// Array layouts:
//   B            (i, j, s, n)
//   HP21         (l, mu, nu)
//   HP22         (i, j, mu, nu, lambda)
//   HP31         (i, j, mu, nu, sigma)
//   HP32         (i, j, mu, nu, alpha, lambda)
//   HP33         (k, mu, nu, sigma)
//   HP34         (mu, nu)
// Partial derivatives with a fibre index (d_mu) are taken in phi, with a base
// index (d_l, d_p) in x.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geovar/chart.hpp"
#include "geovar/engine.hpp"
#include "geovar/errors.hpp"
#include "geovar/geometry.hpp"
#include "geovar/jet.hpp"
#include "geovar/maps.hpp"
#include "geovar/rule.hpp"
#include "geovar/tensor.hpp"

namespace geovar {

enum class MultiplierStructure { general, product };

/// Box over the concatenated coordinates (x, phi).
inline ChartDomain product_domain(const ChartDomain& base, const ChartDomain& fibre) {
  std::vector<Interval> b = base.bounds();
  b.insert(b.end(), fibre.bounds().begin(), fibre.bounds().end());
  return ChartDomain(std::move(b), base.label() + " x " + fibre.label());
}

inline std::vector<double> concat(std::span<const double> x, std::span<const double> phi) {
  std::vector<double> z(x.begin(), x.end());
  z.insert(z.end(), phi.begin(), phi.end());
  return z;
}

class MultiplierField {
 public:
  MultiplierField() = default;

  /// B^{ij}_{sn} = g^{ij}(x) h_{sn}(x, phi).
  static MultiplierField product(MetricField g, FibredMetricField h) {
    if (g.dimension() != h.base_dimension()) throw DimensionMismatch("product multiplier: g vs h base");
    const std::size_t m = g.dimension(), n = h.fibre_dimension();
    Rule r([g, h, m, n]<class T>(std::span<const T> z) {
      const Tensor<T> ginv = inverse_metric(g, z.first(m));
      const Tensor<T> hz = h.at(z);
      std::vector<T> out(m * m * n * n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t s = 0; s < n; ++s)
            for (std::size_t v = 0; v < n; ++v) out[((i * m + j) * n + s) * n + v] = ginv(i, j) * hz(s, v);
      return out;
    });
    MultiplierField b(h.base_domain(), h.fibre_domain(), std::move(r), MultiplierStructure::product);
    b.g_ = std::move(g);
    b.h_ = std::move(h);
    return b;
  }

  /// Arbitrary B from a rule on (x, phi). When validate is set, symmetry in
  /// (i, j) and (s, n) and paired-index regularity are checked at seeded
  /// sample points and violations rejected.
  static MultiplierField general(ChartDomain base, ChartDomain fibre, Rule components, bool validate = true,
                                 std::size_t check_points = 16, std::uint64_t seed = 1,
                                 double floor = kDefaultRegularityFloor) {
    MultiplierField b(std::move(base), std::move(fibre), std::move(components), MultiplierStructure::general);
    b.floor_ = floor;
    if (validate) {
      for (const auto& z : sample_points(product_domain(b.base_, b.fibre_), check_points, seed)) {
        const Tensor<double> v = b.at(std::span<const double>(z));
        b.check_symmetry(v);
        const double det = std::abs(b.paired_determinant(std::span<const double>(z)));
        if (!(det >= floor)) throw SingularMetric("multiplier is singular: paired |det| = " + std::to_string(det));
      }
    }
    return b;
  }

  MultiplierStructure structure() const { return structure_; }
  const ChartDomain& base_domain() const { return base_; }
  const ChartDomain& fibre_domain() const { return fibre_; }
  std::size_t m() const { return base_.dimension(); }
  std::size_t n() const { return fibre_.dimension(); }
  const Rule& rule() const { return rule_; }
  const std::optional<MetricField>& g() const { return g_; }
  const std::optional<FibredMetricField>& h() const { return h_; }

  template <class T>
  Tensor<T> at(std::span<const T> z) const {
    const std::size_t m = this->m(), n = this->n();
    if (z.size() != m + n) throw DimensionMismatch("multiplier point");
    base_.require(z.first(m), "multiplier (base)");
    fibre_.require(z.subspan(m), "multiplier (fibre)");
    const std::vector<T> flat = rule_(z);
    if (flat.size() != m * m * n * n) throw DimensionMismatch("multiplier rule output size");
    Tensor<T> b({m, m, n, n});
    std::copy(flat.begin(), flat.end(), b.flat().begin());
    return b;
  }

  /// Determinant of B as an (m n) x (m n) matrix with rows (i, s), columns (j, n).
  double paired_determinant(std::span<const double> z) const {
    const std::size_t m = this->m(), n = this->n();
    const Tensor<double> b = at(z);
    Tensor<double> mat({m * n, m * n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t v = 0; v < n; ++v) mat(i * n + s, j * n + v) = b(i, j, s, v);
    return determinant(mat);
  }

 private:
  MultiplierField(ChartDomain base, ChartDomain fibre, Rule rule, MultiplierStructure s)
      : base_(std::move(base)), fibre_(std::move(fibre)), rule_(std::move(rule)), structure_(s) {}

  void check_symmetry(const Tensor<double>& b) const {
    const std::size_t m = this->m(), n = this->n();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t v = 0; v < n; ++v) {
            if (!detail::nearly_equal(b(i, j, s, v), b(j, i, s, v)))
              throw SymmetryViolation("multiplier is not symmetric in its upper indices");
            if (!detail::nearly_equal(b(i, j, s, v), b(i, j, v, s)))
              throw SymmetryViolation("multiplier is not symmetric in its lower indices");
          }
  }

  ChartDomain base_;
  ChartDomain fibre_;
  Rule rule_;
  MultiplierStructure structure_ = MultiplierStructure::general;
  std::optional<MetricField> g_;
  std::optional<FibredMetricField> h_;
  double floor_ = kDefaultRegularityFloor;
};

/// E_n = B^{ij}_{sn} G^s_ij.
inline SourceForm dynamical_form(const MultiplierField& b, const MappingProblem& p) {
  if (b.m() != p.m() || b.n() != p.n()) throw DimensionMismatch("dynamical_form dimensions");
  auto fn = [b, p]<class T>(const JetPoint<T>& j) {
    const std::size_t m = p.m(), n = p.n();
    const Tensor<T> gmap = detail::geodesic_tensor(p, j);
    std::vector<T> z(j.x);
    z.insert(z.end(), j.phi.begin(), j.phi.end());
    const Tensor<T> bz = b.at(std::span<const T>(z));
    std::vector<T> e(n, T(0.0));
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k)
          for (std::size_t s = 0; s < n; ++s) e[v] = e[v] + bz(i, k, s, v) * gmap(s, i, k);
    return e;
  };
  return SourceForm(p.base, p.fibre, fn, "dynamical form");
}

namespace detail {

/// d B / d z^a over all (m + n) coordinates: layout (a, i, j, s, n).
inline Tensor<double> multiplier_gradient(const DerivativeEngine& engine, const MultiplierField& b,
                                          std::span<const double> z) {
  const std::size_t m = b.m(), n = b.n(), d = m + n;
  auto f = [&b]<class S>(std::span<const S> q) { return b.rule()(q); };
  const Tensor<double> jac = jacobian(engine, f, z);
  Tensor<double> out({d, m, m, n, n});
  std::copy(jac.flat().begin(), jac.flat().end(), out.flat().begin());
  return out;
}

/// Second derivatives: layout (a, c, i, j, s, n).
inline Tensor<double> multiplier_hessian(const DerivativeEngine& engine, const MultiplierField& b,
                                         std::span<const double> z) {
  const std::size_t m = b.m(), n = b.n(), d = m + n;
  auto f = [&b]<class S>(std::span<const S> q) { return b.rule()(q); };
  const Tensor<double> h = hessian(engine, f, z);
  Tensor<double> out({d, d, m, m, n, n});
  std::copy(h.flat().begin(), h.flat().end(), out.flat().begin());
  return out;
}

/// d Gamma / d q^a: layout (a, k, i, j).
inline Tensor<double> connection_gradient(const DerivativeEngine& engine, const ConnectionField& c,
                                          std::span<const double> q) {
  const std::size_t d = c.dimension();
  auto f = [&c]<class S>(std::span<const S> y) { return c.rule()(y); };
  const Tensor<double> jac = jacobian(engine, f, q);
  Tensor<double> out({d, d, d, d});
  std::copy(jac.flat().begin(), jac.flat().end(), out.flat().begin());
  return out;
}

inline void require_multiplier_point(const MultiplierField& b, std::span<const double> x,
                                     std::span<const double> phi) {
  if (x.size() != b.m() || phi.size() != b.n()) throw DimensionMismatch("multiplier condition point");
}

}  // namespace detail

/// d_p B^{lp}_{mu nu} + B^{ij}_{mu nu} MGamma^l_ij, layout (l, mu, nu).
inline Tensor<double> hp21_residual(const DerivativeEngine& engine, const MultiplierField& b,
                                    const ConnectionField& gamma_m, std::span<const double> x,
                                    std::span<const double> phi) {
  detail::require_multiplier_point(b, x, phi);
  const std::size_t m = b.m(), n = b.n();
  const std::vector<double> z = concat(x, phi);
  const Tensor<double> bz = b.at(std::span<const double>(z));
  const Tensor<double> db = detail::multiplier_gradient(engine, b, z);
  const Tensor<double> c = gamma_m.at(x);
  Tensor<double> r({m, n, n});
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t mu = 0; mu < n; ++mu)
      for (std::size_t nu = 0; nu < n; ++nu) {
        double v = 0.0;
        for (std::size_t p = 0; p < m; ++p) v += db(p, l, p, mu, nu);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j) v += bz(i, j, mu, nu) * c(l, i, j);
        r(l, mu, nu) = v;
      }
  return r;
}

/// dB^{ij}_{mu nu}/dphi^lambda - NGamma^s_{mu lambda} B^{ij}_{s nu}
/// - NGamma^s_{nu lambda} B^{ij}_{s mu}, layout (i, j, mu, nu, lambda).
inline Tensor<double> hp22_residual(const DerivativeEngine& engine, const MultiplierField& b,
                                    const ConnectionField& gamma_n, std::span<const double> x,
                                    std::span<const double> phi) {
  detail::require_multiplier_point(b, x, phi);
  const std::size_t m = b.m(), n = b.n();
  const std::vector<double> z = concat(x, phi);
  const Tensor<double> bz = b.at(std::span<const double>(z));
  const Tensor<double> db = detail::multiplier_gradient(engine, b, z);
  const Tensor<double> c = gamma_n.at(phi);
  Tensor<double> r({m, m, n, n, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t mu = 0; mu < n; ++mu)
        for (std::size_t nu = 0; nu < n; ++nu)
          for (std::size_t la = 0; la < n; ++la) {
            double v = db(m + la, i, j, mu, nu);
            for (std::size_t s = 0; s < n; ++s)
              v -= c(s, mu, la) * bz(i, j, s, nu) + c(s, nu, la) * bz(i, j, s, mu);
            r(i, j, mu, nu, la) = v;
          }
  return r;
}

struct Hp3Residuals {
  Tensor<double> hp31;              // as printed
  Tensor<double> hp31_symmetrized;  // second connection term with B_{alpha mu} Gamma^alpha_{sigma nu}
  Tensor<double> hp32;
  Tensor<double> hp33;
  Tensor<double> hp34;
};

/// Left-hand sides of the four conditions split from the third Helmholtz
/// condition, transcribed term by term.
inline Hp3Residuals hp3x_residuals(const DerivativeEngine& engine, const MultiplierField& b,
                                   const MappingProblem& p, std::span<const double> x,
                                   std::span<const double> phi) {
  detail::require_multiplier_point(b, x, phi);
  const std::size_t m = b.m(), n = b.n();
  const std::vector<double> z = concat(x, phi);
  const Tensor<double> B = b.at(std::span<const double>(z));
  const Tensor<double> dB = detail::multiplier_gradient(engine, b, z);
  const Tensor<double> ddB = detail::multiplier_hessian(engine, b, z);
  const Tensor<double> gm = p.gamma_m.at(x);
  const Tensor<double> gn = p.gamma_n.at(phi);
  const Tensor<double> dgm = detail::connection_gradient(engine, p.gamma_m, x);
  const Tensor<double> dgn = detail::connection_gradient(engine, p.gamma_n, phi);
  // Fibre index a -> coordinate m + a; base index l -> coordinate l.
  auto dBf = [&](std::size_t a, std::size_t i, std::size_t j, std::size_t s, std::size_t v) {
    return dB(m + a, i, j, s, v);
  };

  Hp3Residuals r;
  r.hp31 = Tensor<double>({m, m, n, n, n});
  r.hp31_symmetrized = Tensor<double>({m, m, n, n, n});
  r.hp32 = Tensor<double>({m, m, n, n, n, n});
  r.hp33 = Tensor<double>({m, n, n, n});
  r.hp34 = Tensor<double>({n, n});

  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t mu = 0; mu < n; ++mu)
        for (std::size_t nu = 0; nu < n; ++nu) {
          for (std::size_t sg = 0; sg < n; ++sg) {
            const double head = dBf(nu, i, j, sg, mu) - dBf(mu, i, j, sg, nu) - dBf(sg, i, j, mu, nu);
            double printed = head, symmetrized = head;
            for (std::size_t al = 0; al < n; ++al) {
              printed += B(i, j, al, nu) * gn(al, mu, sg) + B(i, j, al, nu) * gn(al, sg, mu);
              symmetrized += B(i, j, al, nu) * gn(al, mu, sg) + B(i, j, al, mu) * gn(al, sg, nu);
            }
            r.hp31(i, j, mu, nu, sg) = printed;
            r.hp31_symmetrized(i, j, mu, nu, sg) = symmetrized;
          }
          for (std::size_t al = 0; al < n; ++al)
            for (std::size_t la = 0; la < n; ++la) {
              double v = -ddB(m + la, m + al, i, j, mu, nu);
              for (std::size_t sg = 0; sg < n; ++sg) {
                v += dBf(nu, i, j, sg, mu) * gn(sg, al, la) + B(i, j, sg, mu) * dgn(nu, sg, al, la);
                v -= dBf(mu, i, j, sg, nu) * gn(sg, al, la) + B(i, j, sg, nu) * dgn(mu, sg, al, la);
                v += dBf(al, i, j, sg, nu) * gn(sg, mu, la) + B(i, j, sg, nu) * dgn(al, sg, mu, la);
                v += dBf(la, i, j, sg, nu) * gn(sg, al, mu) + B(i, j, sg, nu) * dgn(la, sg, al, mu);
              }
              r.hp32(i, j, mu, nu, al, la) = v;
            }
        }

  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t mu = 0; mu < n; ++mu)
      for (std::size_t nu = 0; nu < n; ++nu)
        for (std::size_t sg = 0; sg < n; ++sg) {
          double v = 0.0;
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
              v += gm(k, i, j) * (dBf(mu, i, j, sg, nu) - dBf(nu, i, j, sg, mu) - dBf(sg, i, j, mu, nu));
          for (std::size_t l = 0; l < m; ++l)
            for (std::size_t la = 0; la < n; ++la) v += 2.0 * dB(l, l, k, la, nu) * gn(la, mu, sg);
          for (std::size_t q = 0; q < m; ++q) v -= 2.0 * ddB(q, m + sg, k, q, mu, nu);
          r.hp33(k, mu, nu, sg) = v;
        }

  for (std::size_t mu = 0; mu < n; ++mu)
    for (std::size_t nu = 0; nu < n; ++nu) {
      double v = 0.0;
      for (std::size_t l = 0; l < m; ++l)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j) v -= dB(l, i, j, mu, nu) * gm(l, i, j) + B(i, j, mu, nu) * dgm(l, l, i, j);
      for (std::size_t l = 0; l < m; ++l)
        for (std::size_t q = 0; q < m; ++q) v -= ddB(l, q, l, q, mu, nu);
      r.hp34(mu, nu) = v;
    }
  return r;
}

/// HP32 against g^{ij} (R_{mu lambda nu alpha} - R_{nu alpha mu lambda}) for a
/// product multiplier, where R is the curvature of NGamma lowered with h.
/// The identity holds when NGamma is metric for h; both sides then vanish.
inline double hp32_riemann_mismatch(const DerivativeEngine& engine, const MultiplierField& b,
                                    const MappingProblem& p, std::span<const double> x,
                                    std::span<const double> phi) {
  if (b.structure() != MultiplierStructure::product) throw ConfigError("riemann comparison needs a product multiplier");
  const std::size_t m = b.m(), n = b.n();
  const Hp3Residuals r = hp3x_residuals(engine, b, p, x, phi);
  const Tensor<double> ginv = inverse_metric(*b.g(), x);
  const Tensor<double> h = b.h()->at(x, phi);
  const Tensor<double> low = lower_first_index(h, riemann_tensor(engine, p.gamma_n, phi));
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t mu = 0; mu < n; ++mu)
        for (std::size_t nu = 0; nu < n; ++nu)
          for (std::size_t al = 0; al < n; ++al)
            for (std::size_t la = 0; la < n; ++la) {
              const double pair = low(mu, la, nu, al) - low(nu, al, mu, la);
              worst = std::max(worst, std::abs(r.hp32(i, j, mu, nu, al, la) - ginv(i, j) * pair));
            }
  return worst;
}

// ---------------------------------------------------------------------------
// Dependencies between the conditions.

struct DependencyReport {
  double hp34_defect = 0.0;       // max |HP34 + d_l HP21^l|, derivative by finite differences
  double hp33_defect = 0.0;       // max |HP33 - (-MGamma HP31 + 2 HP21 NGamma - 2 d_s HP21)|
  double hp33_bare_defect = 0.0;  // max |HP33 + MGamma^k_ij HP31^{ij}| (holds where HP21 does)
  std::size_t points = 0;
  std::vector<double> worst_hp34_point;
  std::vector<double> worst_hp33_point;
};

/// Step of the finite differences applied to the HP21 residual.
inline constexpr double kDependencyFdStep = 1e-3;

/// Checks, at each (x, phi) point, that HP34 is minus the x-divergence of the
/// HP21 residual and that HP33 is the MGamma contraction of HP31 plus terms
/// proportional to the HP21 residual. Both are identities for any symmetric
/// multiplier, so they hold on solutions and non-solutions alike.
inline DependencyReport dependency_checks(const DerivativeEngine& engine, const MultiplierField& b,
                                          const MappingProblem& p,
                                          const std::vector<std::vector<double>>& points,
                                          double fd_step = kDependencyFdStep) {
  const std::size_t m = b.m(), n = b.n();
  const DerivativeEngine outer = DerivativeEngine::fd(fd_step);
  DependencyReport rep;
  for (const auto& z : points) {
    const std::span<const double> zs(z);
    const std::span<const double> x = zs.first(m), phi = zs.subspan(m);
    auto r21 = [&]<class S>(std::span<const S> q) {
      if constexpr (std::is_same_v<S, double>) {
        return hp21_residual(engine, b, p.gamma_m, q.first(m), q.subspan(m)).storage();
      } else {
        throw ConfigError("dependency_checks differentiates HP21 by finite differences only");
        return std::vector<S>{};
      }
    };
    const Tensor<double> d21 = jacobian(outer, r21, zs);  // (a, (l, mu, nu))
    const Tensor<double> r21v = hp21_residual(engine, b, p.gamma_m, x, phi);
    const Hp3Residuals h3 = hp3x_residuals(engine, b, p, x, phi);
    const Tensor<double> gm = p.gamma_m.at(x);
    const Tensor<double> gn = p.gamma_n.at(phi);
    auto r21d = [&](std::size_t a, std::size_t l, std::size_t mu, std::size_t nu) {
      return d21(a, (l * n + mu) * n + nu);
    };

    double d34 = 0.0;
    for (std::size_t mu = 0; mu < n; ++mu)
      for (std::size_t nu = 0; nu < n; ++nu) {
        double div = 0.0;
        for (std::size_t l = 0; l < m; ++l) div += r21d(l, l, mu, nu);
        d34 = std::max(d34, std::abs(h3.hp34(mu, nu) + div));
      }

    double d33 = 0.0, bare = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t mu = 0; mu < n; ++mu)
        for (std::size_t nu = 0; nu < n; ++nu)
          for (std::size_t sg = 0; sg < n; ++sg) {
            double contraction = 0.0;
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = 0; j < m; ++j) contraction -= gm(k, i, j) * h3.hp31(i, j, mu, nu, sg);
            double correction = -2.0 * r21d(m + sg, k, mu, nu);
            for (std::size_t la = 0; la < n; ++la) correction += 2.0 * r21v(k, la, nu) * gn(la, mu, sg);
            d33 = std::max(d33, std::abs(h3.hp33(k, mu, nu, sg) - contraction - correction));
            bare = std::max(bare, std::abs(h3.hp33(k, mu, nu, sg) - contraction));
          }

    if (d34 > rep.hp34_defect || rep.points == 0) {
      rep.hp34_defect = std::max(rep.hp34_defect, d34);
      rep.worst_hp34_point = z;
    }
    if (d33 > rep.hp33_defect || rep.points == 0) {
      rep.hp33_defect = std::max(rep.hp33_defect, d33);
      rep.worst_hp33_point = z;
    }
    rep.hp33_bare_defect = std::max(rep.hp33_bare_defect, bare);
    ++rep.points;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// S-tensor and its trace.

/// S^l_ij = MGamma^l_ij - Gbar^l_ij, symmetric in (i, j).
class STensorField {
 public:
  STensorField() = default;
  STensorField(ChartDomain domain, Rule components) : field_(std::move(domain), std::move(components)) {}

  /// The difference between a connection and the Levi-Civita connection of g.
  static STensorField difference(const ConnectionField& gamma_m, const MetricField& g,
                                 const DerivativeEngine& engine) {
    const ConnectionField lc = levi_civita(g, engine);
    Rule r([a = gamma_m.rule(), c = lc.rule()]<class T>(std::span<const T> x) {
      std::vector<T> s = a(x);
      const std::vector<T> b = c(x);
      for (std::size_t k = 0; k < s.size(); ++k) s[k] = s[k] - b[k];
      return s;
    });
    return STensorField(gamma_m.domain(), std::move(r));
  }

  /// S^l_ij = -(1/m) psi_{,p} g^{lp} g_ij.
  static STensorField conformal(const ScalarField& psi, const MetricField& g, const DerivativeEngine& engine) {
    const std::size_t m = g.dimension();
    Rule r([psi, g, engine, m]<class T>(std::span<const T> x) {
      const std::vector<T> dpsi = psi.gradient(engine, x);
      const Tensor<T> gl = g.at(x);
      const Tensor<T> ginv = inverse_metric(g, x);
      std::vector<T> s(m * m * m, T(0.0));
      for (std::size_t l = 0; l < m; ++l) {
        T up(0.0);
        for (std::size_t q = 0; q < m; ++q) up = up + ginv(l, q) * dpsi[q];
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j) s[(l * m + i) * m + j] = -(1.0 / static_cast<double>(m)) * up * gl(i, j);
      }
      return s;
    });
    return STensorField(g.domain(), std::move(r));
  }

  const ChartDomain& domain() const { return field_.domain(); }
  const Rule& rule() const { return field_.rule(); }

  /// Components (l, i, j); rejects asymmetric values.
  template <class T>
  Tensor<T> at(std::span<const T> x) const {
    return field_.at(x);
  }

  /// The same components viewed as a connection (for Gamma = Gbar + S).
  const ConnectionField& as_connection() const { return field_; }

 private:
  ConnectionField field_;
};

struct STraceDefect {
  std::vector<double> with_factor;     // g^{ij} S^l_ij + (1/n) h^{mn} h_{mn,p} g^{lp}
  std::vector<double> without_factor;  // g^{ij} S^l_ij + h^{mn} h_{mn,p} g^{lp}
};

inline STraceDefect s_tensor_trace_defect(const DerivativeEngine& engine, const MetricField& g,
                                          const FibredMetricField& h, const ConnectionField& gamma_m,
                                          std::span<const double> x, std::span<const double> phi) {
  const std::size_t m = g.dimension(), n = h.fibre_dimension();
  if (x.size() != m || phi.size() != n || gamma_m.dimension() != m) throw DimensionMismatch("s_tensor_trace_defect");
  const Tensor<double> ginv = inverse_metric(g, x);
  const Tensor<double> gbar = christoffel_from_metric(engine, g, x);
  const Tensor<double> gam = gamma_m.at(x);
  const std::vector<double> z = concat(x, phi);
  const Tensor<double> hz = h.at(std::span<const double>(z));
  const Tensor<double> hinv = checked_inverse(hz, h.regularity_floor(), "fibre metric");
  auto f = [&h]<class S>(std::span<const S> q) { return h.rule()(q); };
  const Tensor<double> dh = jacobian(engine, f, std::span<const double>(z), 0, m);  // (p, mu*n+nu)
  std::vector<double> q(m, 0.0);  // h^{mn} h_{mn,p}
  for (std::size_t pp = 0; pp < m; ++pp)
    for (std::size_t mu = 0; mu < n; ++mu)
      for (std::size_t nu = 0; nu < n; ++nu) q[pp] += hinv(mu, nu) * dh(pp, mu * n + nu);
  STraceDefect out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t l = 0; l < m; ++l) {
    double tr = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) tr += ginv(i, j) * (gam(l, i, j) - gbar(l, i, j));
    double rhs = 0.0;
    for (std::size_t pp = 0; pp < m; ++pp) rhs += q[pp] * ginv(l, pp);
    out.with_factor[l] = tr + rhs / static_cast<double>(n);
    out.without_factor[l] = tr + rhs;
  }
  return out;
}

/// max_{p, mu, nu} |h_{mn,p} - c_p h_mn| with c_p = h^{ab} h_{ab,p} / n: zero iff
/// every x-derivative of h is proportional to h.
inline double conformality_defect(const DerivativeEngine& engine, const FibredMetricField& h,
                                  std::span<const double> x, std::span<const double> phi) {
  const std::size_t m = h.base_dimension(), n = h.fibre_dimension();
  const std::vector<double> z = concat(x, phi);
  const Tensor<double> hz = h.at(std::span<const double>(z));
  const Tensor<double> hinv = checked_inverse(hz, h.regularity_floor(), "fibre metric");
  auto f = [&h]<class S>(std::span<const S> q) { return h.rule()(q); };
  const Tensor<double> dh = jacobian(engine, f, std::span<const double>(z), 0, m);
  double worst = 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    double c = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) c += hinv(a, b) * dh(p, a * n + b);
    c /= static_cast<double>(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) worst = std::max(worst, std::abs(dh(p, a * n + b) - c * hz(a, b)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Solution family.

struct SolutionFamily {
  MappingProblem problem;
  MultiplierField multiplier;
  ScalarField psi;
  MetricField fibre_metric;  // h-hat
  STensorField s;
};

struct ConstructionCheck {
  double hp21 = 0.0;
  double hp22 = 0.0;
  std::size_t points = 0;
};

/// Points per axis of the default (x, phi) grid for condition checks.
inline constexpr std::size_t kDefaultGridPerAxis = 5;

/// Tensor-product grid over (x, phi), pulled in from the chart edges.
inline std::vector<std::vector<double>> condition_grid(const ChartDomain& base, const ChartDomain& fibre,
                                                       std::size_t per_axis, std::uint64_t seed,
                                                       double margin) {
  return grid_points(product_domain(base.shrunk(margin), fibre.shrunk(margin)), per_axis, seed);
}

/// Max HP21 / HP22 residual norms of (b, p) over points.
inline ConstructionCheck multiplier_conditions(const DerivativeEngine& engine, const MultiplierField& b,
                                               const MappingProblem& p,
                                               const std::vector<std::vector<double>>& points) {
  ConstructionCheck c;
  const std::size_t m = b.m();
  for (const auto& z : points) {
    const std::span<const double> zs(z);
    c.hp21 = std::max(c.hp21, max_norm(hp21_residual(engine, b, p.gamma_m, zs.first(m), zs.subspan(m))));
    c.hp22 = std::max(c.hp22, max_norm(hp22_residual(engine, b, p.gamma_n, zs.first(m), zs.subspan(m))));
    ++c.points;
  }
  return c;
}

/// g = delta on M, h(x, phi) = e^{psi(x)} hhat(phi), NGamma = Levi-Civita of
/// hhat, MGamma = Gbar(g) + S with S^l_ij = -(1/m) psi_{,p} g^{lp} g_ij, and
/// B = g (x) h. Verifies HP21 and HP22 on a seeded grid and throws
/// ConstructionFailure if either is violated.
inline SolutionFamily construct_solution_family(const DerivativeEngine& engine, const ScalarField& psi,
                                                const MetricField& fibre_metric,
                                                std::size_t per_axis = kDefaultGridPerAxis,
                                                std::uint64_t seed = 1) {
  const ChartDomain& base = psi.domain();
  const ChartDomain& fibre = fibre_metric.domain();
  const std::size_t m = base.dimension();
  if (psi.rule()(std::vector<double>(m, 0.0)).size() != 1) throw DimensionMismatch("psi must be scalar");

  MetricField g(base, Rule([m]<class T>(std::span<const T>) {
                  std::vector<T> out(m * m, T(0.0));
                  for (std::size_t i = 0; i < m; ++i) out[i * m + i] = T(1.0);
                  return out;
                }));
  Rule hr([m, psi, fibre_metric]<class T>(std::span<const T> z) {
    using std::exp;
    const T w = exp(psi.rule()(z.first(m))[0]);
    std::vector<T> hh = fibre_metric.rule()(z.subspan(m));
    for (auto& v : hh) v = w * v;
    return hh;
  });
  FibredMetricField h(base, fibre, std::move(hr), fibre_metric.regularity_floor());
  STensorField s = STensorField::conformal(psi, g, engine);

  MappingProblem p;
  p.base = base;
  p.fibre = fibre;
  p.gamma_m = add_connections(levi_civita(g, engine), s.as_connection());
  p.gamma_n = levi_civita(fibre_metric, engine);
  p.g = g;
  p.h = h;
  p.validate();

  SolutionFamily fam{p, MultiplierField::product(g, h), psi, fibre_metric, s};
  const double margin = std::max(0.05, 4.0 * engine.stencil_radius());
  const auto grid = condition_grid(base, fibre, per_axis, seed, margin);
  const ConstructionCheck c = multiplier_conditions(engine, fam.multiplier, fam.problem, grid);
  const double tol = engine.kind == EngineKind::dual ? 1e-8 : 1e-6;
  if (!(c.hp21 < tol) || !(c.hp22 < tol))
    throw ConstructionFailure("solution family violates HP21/HP22: " + std::to_string(c.hp21) + ", " +
                              std::to_string(c.hp22) + " (tolerance " + std::to_string(tol) + ")");
  return fam;
}

}  // namespace geovar

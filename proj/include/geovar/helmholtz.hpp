#pragma once

// Helmholtz conditions of variationality for second-order source forms:
//   H1 = dE_n/dphi^m_lp - dE_m/dphi^n_lp
//   H2 = dE_n/dphi^m_l + dE_m/dphi^n_l - 2 d_p (dE_m/dphi^n_lp)
//   H3 = dE_n/dphi^m - dE_m/dphi^n + d_l (dE_m/dphi^n_l) - d_l d_p (dE_m/dphi^n_lp)
// Only forms affine in the second derivatives are accepted, so d_l d_p never
// needs fourth-order jet data.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geovar/engine.hpp"
#include "geovar/errors.hpp"
#include "geovar/jet.hpp"
#include "geovar/tensor.hpp"

namespace geovar {

struct HelmholtzResidual {
  Tensor<double> h1;  // (nu, mu, l, p)
  Tensor<double> h2;  // (nu, mu, l)
  Tensor<double> h3;  // (nu, mu)
  double norm1 = 0.0;
  double norm2 = 0.0;
  double norm3 = 0.0;
  JetPoint<double> sample;

  double max_norm() const { return std::max({norm1, norm2, norm3}); }
};

namespace detail {

/// dE/dphi^m_lp for all (nu, mu, l, p), flattened, as a generic jet function.
template <class S>
std::vector<S> second_jet_coefficients(const DerivativeEngine& engine, const SourceForm& e,
                                       const JetPoint<S>& j) {
  const std::size_t m = j.m, n = j.n;
  const JetLayout lay{m, n};
  auto f = [&e]<class U>(const JetPoint<U>& jj) { return e(jj); };
  std::vector<S> out(n * n * m * m, S(0.0));
  std::vector<S> dir(lay.size(), S(0.0));
  for (std::size_t mu = 0; mu < n; ++mu)
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t p = l; p < m; ++p) {
        dir[lay.phi2(mu, l, p)] = S(1.0);
        dir[lay.phi2(mu, p, l)] = S(1.0);
        const std::vector<S> c = jet_directional(engine, f, j, std::span<const S>(dir));
        dir[lay.phi2(mu, l, p)] = S(0.0);
        dir[lay.phi2(mu, p, l)] = S(0.0);
        const double w = (l == p) ? 1.0 : 0.5;
        for (std::size_t nu = 0; nu < n; ++nu) {
          out[((nu * n + mu) * m + l) * m + p] = w * c[nu];
          out[((nu * n + mu) * m + p) * m + l] = w * c[nu];
        }
      }
  return out;
}

/// dE/dphi^m_l for all (nu, mu, l), flattened.
template <class S>
std::vector<S> first_jet_coefficients(const DerivativeEngine& engine, const SourceForm& e,
                                      const JetPoint<S>& j) {
  const std::size_t m = j.m, n = j.n;
  const JetLayout lay{m, n};
  auto f = [&e]<class U>(const JetPoint<U>& jj) { return e(jj); };
  std::vector<S> out(n * n * m, S(0.0));
  std::vector<S> dir(lay.size(), S(0.0));
  for (std::size_t mu = 0; mu < n; ++mu)
    for (std::size_t l = 0; l < m; ++l) {
      dir[lay.phi1(mu, l)] = S(1.0);
      const std::vector<S> c = jet_directional(engine, f, j, std::span<const S>(dir));
      dir[lay.phi1(mu, l)] = S(0.0);
      for (std::size_t nu = 0; nu < n; ++nu) out[(nu * n + mu) * m + l] = c[nu];
    }
  return out;
}

/// Deterministic symmetric perturbation of the jet block selected by order.
inline JetPoint<double> perturbed_jet(const JetPoint<double>& j, int order, double amount) {
  JetPoint<double> out = j;
  SampleStream s(0x5eedULL + static_cast<std::uint64_t>(order));
  const std::size_t m = j.m;
  for (std::size_t a = 0; a < j.n; ++a)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = i; k < m; ++k) {
        if (order == 2) {
          out.phi2(a, i, k) += amount * s.uniform(-1.0, 1.0);
          out.phi2(a, k, i) = out.phi2(a, i, k);
        } else {
          for (std::size_t l = k; l < m; ++l) {
            const double d = amount * s.uniform(-1.0, 1.0);
            const std::size_t q[6][3] = {{i, k, l}, {i, l, k}, {k, i, l}, {k, l, i}, {l, i, k}, {l, k, i}};
            for (const auto& r : q) out.phi3(a, r[0], r[1], r[2]) = j.phi3(a, r[0], r[1], r[2]) + d;
          }
        }
      }
  return out;
}

}  // namespace detail

struct SourceFormOrderReport {
  double phi3_sensitivity = 0.0;         // max |E(J') - E(J)| under a phi3 perturbation
  double coefficient_sensitivity = 0.0;  // max change of dE/dphi_lp under a phi2 perturbation
};

/// Perturbation tests for the two structural assumptions the Helmholtz
/// evaluation relies on: no phi3 dependence, and affine dependence on phi2.
inline SourceFormOrderReport source_form_order(const DerivativeEngine& engine, const SourceForm& e,
                                               const JetPoint<double>& j) {
  SourceFormOrderReport r;
  const std::vector<double> base = e(j);
  const std::vector<double> moved = e(detail::perturbed_jet(j, 3, 0.5));
  r.phi3_sensitivity = max_abs_diff(std::span<const double>(base), std::span<const double>(moved));
  const auto c0 = detail::second_jet_coefficients(engine, e, j);
  const auto c1 = detail::second_jet_coefficients(engine, e, detail::perturbed_jet(j, 2, 0.5));
  r.coefficient_sensitivity = max_abs_diff(std::span<const double>(c0), std::span<const double>(c1));
  return r;
}

/// Relative thresholds for source_form_order; both engines stay far below
/// them for forms of the admitted shape.
inline constexpr double kPhi3SensitivityLimit = 1e-10;
inline constexpr double kAffineSensitivityLimit = 1e-6;

/// The three Helmholtz residual arrays at one jet. Throws NonAffineSourceForm
/// for forms whose second-derivative coefficients depend on phi2, and
/// InvalidJet for forms that read phi3.
inline HelmholtzResidual helmholtz_residuals(const DerivativeEngine& engine, const SourceForm& e,
                                             const JetPoint<double>& j) {
  j.validate();
  if (j.m != e.base_dim() || j.n != e.fibre_dim()) throw DimensionMismatch("helmholtz jet dimensions");
  const std::size_t m = j.m, n = j.n;

  const auto order = source_form_order(engine, e, j);
  const double scale = std::max(1.0, max_norm(e(j)));
  if (order.phi3_sensitivity > kPhi3SensitivityLimit * scale)
    throw InvalidJet("source form '" + e.label() + "' depends on third-order jet data");
  if (order.coefficient_sensitivity > kAffineSensitivityLimit * scale)
    throw NonAffineSourceForm("source form '" + e.label() + "' is not affine in the second derivatives");

  const JetPartials<double> pd = jet_partials(engine, e, j);

  auto c2 = [&]<class S>(const JetPoint<S>& jj) { return detail::second_jet_coefficients(engine, e, jj); };
  auto c1 = [&]<class S>(const JetPoint<S>& jj) { return detail::first_jet_coefficients(engine, e, jj); };
  // sum_p d_p (dE/dphi_lp), indexed (nu, mu, l).
  auto div2 = [&]<class S>(const JetPoint<S>& jj) {
    std::vector<S> out(n * n * m, S(0.0));
    for (std::size_t p = 0; p < m; ++p) {
      const std::vector<S> d = total_derivative(engine, c2, p, jj);
      for (std::size_t a = 0; a < n * n; ++a)
        for (std::size_t l = 0; l < m; ++l) out[a * m + l] = out[a * m + l] + d[(a * m + l) * m + p];
    }
    return out;
  };

  const std::vector<double> dp_c2 = div2(j);
  std::vector<double> dl_c1(n * n, 0.0);
  std::vector<double> dldp_c2(n * n, 0.0);
  for (std::size_t l = 0; l < m; ++l) {
    const std::vector<double> a = total_derivative(engine, c1, l, j);
    const std::vector<double> b = total_derivative(engine, div2, l, j);
    for (std::size_t q = 0; q < n * n; ++q) {
      dl_c1[q] += a[q * m + l];
      dldp_c2[q] += b[q * m + l];
    }
  }

  HelmholtzResidual r;
  r.sample = j;
  r.h1 = Tensor<double>({n, n, m, m});
  r.h2 = Tensor<double>({n, n, m});
  r.h3 = Tensor<double>({n, n});
  for (std::size_t nu = 0; nu < n; ++nu)
    for (std::size_t mu = 0; mu < n; ++mu) {
      for (std::size_t l = 0; l < m; ++l) {
        for (std::size_t p = 0; p < m; ++p) r.h1(nu, mu, l, p) = pd.d2(nu, mu, l, p) - pd.d2(mu, nu, l, p);
        r.h2(nu, mu, l) = pd.d1(nu, mu, l) + pd.d1(mu, nu, l) - 2.0 * dp_c2[(mu * n + nu) * m + l];
      }
      r.h3(nu, mu) = pd.d0(nu, mu) - pd.d0(mu, nu) + dl_c1[mu * n + nu] - dldp_c2[mu * n + nu];
    }
  r.norm1 = geovar::max_norm(r.h1);
  r.norm2 = geovar::max_norm(r.h2);
  r.norm3 = geovar::max_norm(r.h3);
  return r;
}

inline constexpr double kHelmholtzToleranceDual = 1e-6;
inline constexpr double kHelmholtzToleranceFd = 1e-3;

/// Aggregate over seeded jets. A pass is sampled evidence of variationality,
/// not a proof.
struct VariationalityVerdict {
  bool pass = true;
  double tolerance = 0.0;
  std::size_t samples = 0;
  double worst = 0.0;  // max over samples and conditions
  double worst_h1 = 0.0;
  double worst_h2 = 0.0;
  double worst_h3 = 0.0;
  std::string worst_condition;  // "H1", "H2" or "H3"
  std::size_t worst_index = 0;
  JetPoint<double> worst_jet;
};

struct JetSampling {
  ChartDomain base;
  ChartDomain fibre;
  double derivative_scale = 1.0;
};

/// Jets drawn inside the form's charts, pulled in far enough that nested
/// finite-difference stencils stay inside.
inline JetSampling default_jet_sampling(const SourceForm& e, const DerivativeEngine& engine) {
  const double margin = std::max(0.05, 8.0 * engine.stencil_radius());
  return {e.base_domain().shrunk(margin), e.fibre_domain().shrunk(margin), 1.0};
}

inline VariationalityVerdict variationality_verdict(const DerivativeEngine& engine, const SourceForm& e,
                                                    std::size_t sample_count, std::uint64_t seed,
                                                    double tolerance, const JetSampling& sampling) {
  if (sample_count == 0) throw ConfigError("variationality_verdict needs at least one sample");
  const auto jets = random_jets(sampling.base, sampling.fibre, sample_count, seed, sampling.derivative_scale);
  VariationalityVerdict v;
  v.tolerance = tolerance;
  v.samples = sample_count;
  for (std::size_t k = 0; k < jets.size(); ++k) {
    const HelmholtzResidual r = helmholtz_residuals(engine, e, jets[k]);
    v.worst_h1 = std::max(v.worst_h1, r.norm1);
    v.worst_h2 = std::max(v.worst_h2, r.norm2);
    v.worst_h3 = std::max(v.worst_h3, r.norm3);
    if (k == 0 || r.max_norm() > v.worst) {
      v.worst = r.max_norm();
      v.worst_index = k;
      v.worst_jet = jets[k];
      v.worst_condition = r.norm1 >= r.norm2 && r.norm1 >= r.norm3 ? "H1" : (r.norm2 >= r.norm3 ? "H2" : "H3");
    }
  }
  v.pass = v.worst < tolerance;
  return v;
}

inline VariationalityVerdict variationality_verdict(const DerivativeEngine& engine, const SourceForm& e,
                                                    std::size_t sample_count, std::uint64_t seed,
                                                    double tolerance) {
  return variationality_verdict(engine, e, sample_count, seed, tolerance, default_jet_sampling(e, engine));
}

}  // namespace geovar

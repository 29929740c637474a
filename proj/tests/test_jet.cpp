#include <cmath>

#include "support.hpp"

namespace geovar {
namespace {

using testing::kDual;
using testing::kFd;

JetPoint<double> sample_jet(std::size_t m, std::size_t n, std::uint64_t seed) {
  return random_jets(testing::box(m, -1, 1), testing::box(n, -1, 1), 1, seed)[0];
}

TEST(JetPoint, FlattenRoundTrip) {
  const JetPoint<double> j = sample_jet(2, 3, 5);
  const std::vector<double> z = j.flatten();
  EXPECT_EQ(z.size(), jet_size(2, 3));
  EXPECT_EQ(JetPoint<double>::unflatten(2, 3, z).flatten(), z);
}

TEST(JetPoint, AsymmetricHigherDerivativesAreRejected) {
  JetPoint<double> j = sample_jet(2, 1, 3);
  j.phi2(0, 0, 1) += 0.1;
  EXPECT_THROW(j.validate(), InvalidJet);
  JetPoint<double> k = sample_jet(2, 1, 3);
  k.phi3(0, 0, 0, 1) += 0.1;
  EXPECT_THROW(k.validate(), InvalidJet);
}

TEST(JetPartials, SecondJetCoordinate) {
  // E_nu = phi^nu_11 (m = 1, n = 2)
  const SourceForm e(testing::box(1, -1, 1), testing::box(2, -1, 1),
                     []<class T>(const JetPoint<T>& j) { return std::vector<T>{j.phi2(0, 0, 0), j.phi2(1, 0, 0)}; });
  const JetPartials<double> p = jet_partials(kDual, e, sample_jet(1, 2, 9));
  for (std::size_t nu = 0; nu < 2; ++nu)
    for (std::size_t mu = 0; mu < 2; ++mu) {
      EXPECT_EQ(p.d2(nu, mu, 0, 0), nu == mu ? 1.0 : 0.0);
      EXPECT_EQ(p.d1(nu, mu, 0), 0.0);
      EXPECT_EQ(p.d0(nu, mu), 0.0);
    }
}

TEST(JetPartials, ValueCoordinate) {
  // E_nu = (phi^1)^2 delta_nu1: dE_1/dphi^1 = 2 phi^1
  const SourceForm e(testing::box(1, -1, 1), testing::box(2, -1, 1),
                     []<class T>(const JetPoint<T>& j) { return std::vector<T>{j.phi[0] * j.phi[0], T(0.0)}; });
  const JetPoint<double> j = sample_jet(1, 2, 11);
  const JetPartials<double> p = cross_checked_jet_partials(e, j);
  EXPECT_NEAR(p.d0(0, 0), 2.0 * j.phi[0], 1e-15);
  EXPECT_EQ(p.d0(1, 0), 0.0);
}

TEST(JetPartials, HarmonicFormCoefficientsAreGTimesH) {
  // Flat g, h: E = -g^{ij} h_sn phi^s_ij, so dE_nu/dphi^mu_lp = -g^{lp} h_mu nu.
  const MappingProblem p = testing::flat_problem(2, 2);
  const SourceForm e = euler_lagrange_form(energy_lagrangian(p), kDual);
  const JetPartials<double> d = jet_partials(kDual, e, sample_jet(2, 2, 4));
  for (std::size_t nu = 0; nu < 2; ++nu)
    for (std::size_t mu = 0; mu < 2; ++mu)
      for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t q = 0; q < 2; ++q) EXPECT_NEAR(d.d2(nu, mu, l, q), -(l == q && mu == nu ? 1.0 : 0.0), 1e-14);
}

TEST(JetPartials, EnginesDisagreeOnlyBeyondTolerance) {
  const SourceForm e(testing::box(1, -1, 1), testing::box(1, -1, 1),
                     []<class T>(const JetPoint<T>& j) {
                       using std::exp;
                       return std::vector<T>{exp(j.phi[0]) * j.phi2(0, 0, 0)};
                     });
  EXPECT_NO_THROW(cross_checked_jet_partials(e, sample_jet(1, 1, 2)));
  EXPECT_THROW(cross_checked_jet_partials(e, sample_jet(1, 1, 2), 1e-16, 0.3), EngineDisagreement);
}

TEST(TotalDerivative, ClosedForms) {
  JetPoint<double> j = sample_jet(1, 1, 21);
  auto f = []<class T>(const JetPoint<T>& jj) { return std::vector<T>{jj.phi[0]}; };
  EXPECT_NEAR(total_derivative(kDual, f, 0, j)[0], j.phi1(0, 0), 1e-15);
  auto g = []<class T>(const JetPoint<T>& jj) { return std::vector<T>{jj.x[0] * jj.phi1(0, 0)}; };
  EXPECT_NEAR(total_derivative(kDual, g, 0, j)[0], j.phi1(0, 0) + j.x[0] * j.phi2(0, 0, 0), 1e-15);
}

TEST(TotalDerivative, AgreesWithDerivativeAlongAProlongedMap) {
  // d_p f along the prolongation of a cubic map equals d/dx^p of f(j(x)).
  const Rule map([]<class T>(std::span<const T> x) {
    return std::vector<T>{x[0] * x[0] * x[1] + 0.3 * x[1] * x[1] * x[1], x[0] - x[0] * x[1] * x[1]};
  });
  auto f = []<class T>(const JetPoint<T>& j) {
    using std::sin;
    return std::vector<T>{sin(j.phi[0]) * j.phi1(1, 0) + j.phi2(0, 0, 1) * j.x[1], j.phi2(1, 1, 1) * j.phi[1]};
  };
  const std::vector<double> x{0.4, -0.3};
  const JetPoint<double> j = prolong(kDual, map, 2, x);
  auto along = [&](std::vector<double> y) {
    const std::span<const double> ys(y);
    return f(prolong(kDual, map, 2, ys));
  };
  const double h = 1e-3;
  for (std::size_t p = 0; p < 2; ++p) {
    const std::vector<double> td = total_derivative(kDual, f, p, j);
    auto at = [&](double t) {
      std::vector<double> y = x;
      y[p] += t;
      return along(y);
    };
    const auto a = at(-2 * h), b = at(-h), c = at(h), d = at(2 * h);
    std::vector<double> direct(2);
    for (std::size_t k = 0; k < 2; ++k) direct[k] = (a[k] - 8 * b[k] + 8 * c[k] - d[k]) / (12 * h);
    EXPECT_LT(testing::max_abs_gap(td, direct), 1e-5) << "p = " << p;
  }
}

TEST(Prolong, CubicAtOne) {
  const Rule cube([]<class T>(std::span<const T> x) { return std::vector<T>{x[0] * x[0] * x[0]}; });
  for (const auto& e : {kDual, kFd}) {
    const JetPoint<double> j = prolong(e, cube, 1, std::vector<double>{1.0});
    const double tol = e.kind == EngineKind::dual ? 1e-14 : 1e-6;
    EXPECT_NEAR(j.phi[0], 1.0, tol);
    EXPECT_NEAR(j.phi1(0, 0), 3.0, tol);
    EXPECT_NEAR(j.phi2(0, 0, 0), 6.0, tol);
    EXPECT_NEAR(j.phi3(0, 0, 0, 0), 6.0, tol);
  }
}

TEST(Prolong, LinearMapHasNoHigherDerivatives) {
  const Rule lin = catalog::linear_map({{1, 2}, {-1, 0.5}, {0.3, 0.3}}, {0, 0, 0});
  const JetPoint<double> j = prolong(kDual, lin, 3, std::vector<double>{0.2, 0.9});
  EXPECT_EQ(max_norm(j.phi2), 0.0);
  EXPECT_EQ(max_norm(j.phi3), 0.0);
  EXPECT_DOUBLE_EQ(j.phi1(0, 1), 2.0);
}

TEST(Prolong, GnomonicEnginesAgree) {
  const std::vector<double> x{1.1, 0.3};
  const JetPoint<double> a = prolong(kDual, catalog::gnomonic_map(), 2, x);
  const JetPoint<double> b = prolong(kFd, catalog::gnomonic_map(), 2, x);
  EXPECT_LT(testing::max_abs_gap(a.flatten(), b.flatten()), 1e-5);
  EXPECT_NO_THROW(a.validate());
  EXPECT_NO_THROW(b.validate());
}

TEST(EulerLagrange, OneDimensionalLaplace) {
  const LagrangianDensity lag(testing::box(1, -1, 1), testing::box(1, -1, 1),
                              []<class T>(const JetPoint<T>& j) { return 0.5 * j.phi1(0, 0) * j.phi1(0, 0); });
  const JetPoint<double> j = sample_jet(1, 1, 17);
  for (const auto& e : {kDual, kFd})
    EXPECT_NEAR(euler_lagrange(e, lag, j)[0], -j.phi2(0, 0, 0), e.kind == EngineKind::dual ? 1e-14 : 1e-8);
}

TEST(EulerLagrange, FlatHarmonicLagrangian) {
  const MappingProblem p = testing::flat_problem(2, 3);
  const LagrangianDensity lag = energy_lagrangian(p);
  for (const auto& j : random_jets(testing::box(2, -1, 1), testing::box(3, -1, 1), 10, 8)) {
    const std::vector<double> el = euler_lagrange(kDual, lag, j);
    for (std::size_t s = 0; s < 3; ++s) EXPECT_NEAR(el[s], -(j.phi2(s, 0, 0) + j.phi2(s, 1, 1)), 1e-14);
  }
}

TEST(EulerLagrange, ConstantMapJetIsCritical) {
  const MetricField sphere = catalog::round_sphere_metric(testing::sphere_chart());
  const MappingProblem p = testing::metric_problem(catalog::shear_metric(testing::box(2, -1, 1), 0.5), sphere);
  JetPoint<double> j = JetPoint<double>::zeros(2, 2);
  j.x = {0.2, 0.4};
  j.phi = {1.2, 0.1};
  EXPECT_LT(testing::max_abs(euler_lagrange(kDual, energy_lagrangian(p), j)), 1e-15);
}

TEST(RandomJets, SymmetricAndSeeded) {
  const auto a = random_jets(testing::box(3, -1, 1), testing::box(2, -1, 1), 5, 77);
  const auto b = random_jets(testing::box(3, -1, 1), testing::box(2, -1, 1), 5, 77);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NO_THROW(a[k].validate());
    EXPECT_EQ(a[k].flatten(), b[k].flatten());
  }
}

}  // namespace
}  // namespace geovar

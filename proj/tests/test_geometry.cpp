#include <cmath>
#include <numbers>

#include "support.hpp"

namespace geovar {
namespace {

using std::numbers::pi;
using testing::kDual;
using testing::kFd;

TEST(Christoffel, FlatMetricHasNoSymbols) {
  const MetricField g = catalog::flat_metric(testing::box(2, -1, 1));
  const std::vector<double> p{0.3, -0.2};
  EXPECT_EQ(max_norm(christoffel_from_metric(kDual, g, std::span<const double>(p))), 0.0);
}

TEST(Christoffel, RoundSphereAtQuarterPi) {
  const MetricField g = catalog::round_sphere_metric(testing::sphere_chart());
  const std::vector<double> p{pi / 4, 0.2};
  for (const auto& e : {kDual, kFd}) {
    const Tensor<double> c = christoffel_from_metric(e, g, std::span<const double>(p));
    const double tol = e.kind == EngineKind::dual ? 1e-14 : 1e-8;
    EXPECT_NEAR(c(0, 1, 1), -0.5, tol);  // Gamma^theta_phiphi = -sin cos
    EXPECT_NEAR(c(1, 0, 1), 1.0, tol);   // Gamma^phi_thetaphi = cot
    EXPECT_NEAR(c(1, 1, 0), 1.0, tol);
    EXPECT_NEAR(c(0, 0, 0), 0.0, tol);
    EXPECT_NEAR(max_norm(metric_compatibility_residual(e, g, levi_civita(g, e), std::span<const double>(p))), 0.0,
                e.kind == EngineKind::dual ? 1e-8 : 1e-5);
  }
}

TEST(Christoffel, ConformalMetricMatchesClosedForm) {
  // g = e^{2 psi} delta, psi = x^1: Gamma^k_ij = psi_i d^k_j + psi_j d^k_i - psi_k d_ij
  const MetricField g = catalog::conformal_flat_metric(testing::box(2, -1, 1), {1.0, 0.0});
  const std::vector<double> p{0.4, -0.6};
  const Tensor<double> c = christoffel_from_metric(kDual, g, std::span<const double>(p));
  const double dpsi[2] = {1.0, 0.0};
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const double expect = dpsi[i] * (k == j) + dpsi[j] * (k == i) - dpsi[k] * (i == j);
        EXPECT_NEAR(c(k, i, j), expect, 1e-14);
      }
}

TEST(Metricity, NonMetricConnectionLeavesTheExpectedResidual) {
  const ChartDomain d = testing::box(2, -1, 1);
  const MetricField g = catalog::flat_metric(d);
  const std::vector<double> p{0.1, 0.2};
  EXPECT_EQ(max_norm(metric_compatibility_residual(kDual, g, ConnectionField::zero(d), std::span<const double>(p))),
            0.0);
  const ConnectionField c = with_constant_offset(ConnectionField::zero(d), 0, 0, 0, 1.0);
  const Tensor<double> r = metric_compatibility_residual(kDual, g, c, std::span<const double>(p));
  EXPECT_DOUBLE_EQ(r(0, 0, 0), -2.0);
}

TEST(Metricity, PointDependentNonMetricConnection) {
  // flat g, Gamma^0_00 = (x^1)^2: residual -2 (x^1)^2 at component (0,0,0)
  const ChartDomain d = testing::box(2, -1, 1);
  const ConnectionField c(d, Rule([]<class T>(std::span<const T> x) {
                            std::vector<T> v(8, T(0.0));
                            v[0] = x[1] * x[1];
                            return v;
                          }));
  const std::vector<double> p{0.1, 0.5};
  const Tensor<double> r =
      metric_compatibility_residual(kDual, catalog::flat_metric(d), c, std::span<const double>(p));
  EXPECT_NEAR(r(0, 0, 0), -0.5, 1e-15);
}

TEST(Connection, AsymmetricSymbolsAreRejected) {
  const ChartDomain d = testing::box(2, -1, 1);
  const ConnectionField c(d, Rule([]<class T>(std::span<const T>) {
                            std::vector<T> v(8, T(0.0));
                            v[1] = T(1.0);  // Gamma^0_01 without Gamma^0_10
                            return v;
                          }));
  const std::vector<double> p{0.0, 0.0};
  EXPECT_THROW(c.at(std::span<const double>(p)), SymmetryViolation);
}

TEST(Metric, SingularMetricIsRejected) {
  const ChartDomain d = testing::box(2, -1, 1);
  const MetricField g(d, Rule([]<class T>(std::span<const T> x) {
                        return std::vector<T>{T(1.0), T(0.0), T(0.0), x[0] * x[0]};
                      }));
  const std::vector<double> p{0.0, 0.3};
  EXPECT_THROW(inverse_metric(g, std::span<const double>(p)), SingularMetric);
}

TEST(Riemann, FlatConnectionHasNoCurvature) {
  const ChartDomain d = testing::box(3, -1, 1);
  const std::vector<double> p{0.1, 0.2, 0.3};
  EXPECT_EQ(max_norm(riemann_tensor(kDual, ConnectionField::zero(d), std::span<const double>(p))), 0.0);
}

TEST(Riemann, UnitSphereHasSectionalCurvatureOne) {
  const MetricField g = catalog::round_sphere_metric(testing::sphere_chart());
  for (const double th : {0.4, pi / 4, 1.3, 2.5}) {
    const std::vector<double> p{th, 0.3};
    for (const auto& e : {kDual, kFd}) {
      const Tensor<double> r = riemann_tensor(e, levi_civita(g, e), std::span<const double>(p));
      EXPECT_NEAR(r(0, 1, 0, 1), std::sin(th) * std::sin(th), e.kind == EngineKind::dual ? 1e-13 : 1e-6)
          << "theta " << th << " " << e.name();
      const PairSymmetryReport ps = lowered_riemann_pair_symmetry_defect(e, g, levi_civita(g, e), std::span<const double>(p));
      EXPECT_LT(ps.defect, e.kind == EngineKind::dual ? 1e-12 : 1e-6);
      EXPECT_TRUE(ps.metric_compatible);
    }
  }
}

TEST(Riemann, AntisymmetricInLastPairForAnyConnection) {
  const ChartDomain d = testing::box(2, -1, 1);
  const ConnectionField c(d, Rule([]<class T>(std::span<const T> x) {
                            // symmetric in the lower pair, otherwise arbitrary
                            using std::exp;
                            using std::sin;
                            const T a = sin(x[0]) * x[1], b = x[0] * x[0] + 0.3, q = exp(x[1]) - x[0];
                            return std::vector<T>{a, b, b, q, q * a, T(0.2), T(0.2), b * b};
                          }));
  const std::vector<double> p{0.3, -0.4};
  const Tensor<double> r = riemann_tensor(kDual, c, std::span<const double>(p));
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t l = 0; l < 2; ++l)
      for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(r(s, l, n, a) + r(s, l, a, n), 0.0, 1e-14);
}

TEST(TraceIdentity, HoldsForUnimodularAndFailsOnSphere) {
  const MetricField shear = catalog::shear_metric(testing::box(2, -1, 1), 0.5);
  const MetricField sphere = catalog::round_sphere_metric(testing::sphere_chart());
  const std::vector<double> p{0.7, 0.3};
  EXPECT_LT(max_norm(trace_identity_defect(kDual, shear, std::span<const double>(p))), 1e-12);
  // g^ij Gbar^theta_ij = g^phiphi (-sin cos) = -cot theta, d_l g^{theta l} = 0
  EXPECT_NEAR(trace_identity_defect(kDual, sphere, std::span<const double>(p))[0], -1.0 / std::tan(0.7), 1e-13);
}

TEST(FibredMetric, SliceMatchesPointEvaluation) {
  const ChartDomain base = testing::box(1, -1, 1), fibre = testing::sphere_chart();
  const ScalarField psi = catalog::quadratic_scalar(base, 0.0, {1.0}, {});
  const SolutionFamily fam = construct_solution_family(kDual, psi, catalog::round_sphere_metric(fibre));
  const std::vector<double> x{0.3}, phi{1.0, 0.2}, z{0.3, 1.0, 0.2};
  const Tensor<double> a = fam.problem.metric_h().slice(x).at(std::span<const double>(phi));
  const Tensor<double> b = fam.problem.metric_h().at(std::span<const double>(z));
  EXPECT_EQ(max_abs_diff(a.flat(), b.flat()), 0.0);
  EXPECT_NEAR(a(1, 1), std::exp(0.3) * std::sin(1.0) * std::sin(1.0), 1e-15);
}

}  // namespace
}  // namespace geovar

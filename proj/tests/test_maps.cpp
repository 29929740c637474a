#include <cmath>
#include <numbers>

#include "support.hpp"

namespace geovar {
namespace {

using std::numbers::pi;
using testing::kDual;
using testing::kFd;

MappingProblem gnomonic_problem() {
  return testing::metric_problem(catalog::round_sphere_metric(testing::sphere_chart()),
                                 catalog::gnomonic_sphere_metric(testing::box(2, -10, 10)));
}

MappingProblem sphere_to_plane() {
  return testing::metric_problem(catalog::round_sphere_metric(testing::sphere_chart()),
                                 catalog::flat_metric(testing::box(2, -10, 10)));
}

/// Round sphere with the longitude unrestricted, so closed geodesics fit.
ConnectionField wide_sphere_connection() {
  const ChartDomain d({{0.1, pi - 0.1}, {-20.0, 20.0}}, "S2 wide");
  return levi_civita(catalog::round_sphere_metric(d), kDual);
}

double residual_at(const MappingProblem& p, const Rule& map, const std::vector<double>& x,
                   const DerivativeEngine& e = kDual) {
  return max_norm(geodesic_map_residual(p, prolong(e, map, p.n(), x)));
}

TEST(GeodesicResidual, AffineMapsBetweenFlatSpaces) {
  const MappingProblem p = testing::flat_problem(2, 3);
  const Rule lin = catalog::linear_map({{1, 2}, {0, 1}, {-3, 0.5}}, {0.1, 0.2, 0.3});
  for (const auto& x : sample_points(testing::box(2, -0.5, 0.5), 20, 3)) EXPECT_EQ(residual_at(p, lin, x), 0.0);
  const MappingProblem sq = testing::flat_problem(2, 2);
  EXPECT_EQ(residual_at(sq, catalog::identity_map(), {0.3, -0.1}), 0.0);
}

TEST(GeodesicResidual, BentMapHasTheSecondDerivativeAsResidual) {
  const MappingProblem p = testing::flat_problem(2, 2);
  const Tensor<double> r = geodesic_map_residual(p, prolong(kDual, catalog::bent_map(0.7), 2, std::vector<double>{0.2, 0.1}));
  EXPECT_DOUBLE_EQ(r(1, 0, 0), 1.4);
  EXPECT_DOUBLE_EQ(max_norm(r), 1.4);
}

TEST(GeodesicResidual, GnomonicProjectionIsAGeodesicMap) {
  const MappingProblem p = gnomonic_problem();
  for (const auto& x : sample_points(ChartDomain({{0.8, 2.34}, {-0.7, 0.7}}, "s"), 50, 11)) {
    EXPECT_LT(residual_at(p, catalog::gnomonic_map(), x), 1e-8);
    EXPECT_LT(residual_at(p, catalog::gnomonic_map(), x, kFd), 1e-4);
  }
}

TEST(GeodesicResidual, StereographicProjectionIsNot) {
  const MappingProblem p = sphere_to_plane();
  EXPECT_GT(residual_at(p, catalog::stereographic_map(), {1.2, 0.3}), 1e-2);
}

TEST(GeodesicResidual, RequiresBaseDimensionAtMostFibreDimension) {
  const MappingProblem p = testing::flat_problem(2, 1);
  const JetPoint<double> j = prolong(kDual, catalog::harmonic_quadratic_map(), 1, std::vector<double>{0.1, 0.2});
  EXPECT_THROW(geodesic_map_residual(p, j), DimensionMismatch);
  EXPECT_NO_THROW(harmonic_residual(p, j));
}

TEST(HarmonicResidual, ConstantMapsAreHarmonic) {
  const MappingProblem p = sphere_to_plane();
  const JetPoint<double> j = prolong(kDual, catalog::constant_map({1.0, -2.0}), 2, std::vector<double>{0.9, 0.1});
  EXPECT_EQ(testing::max_abs(harmonic_residual(p, j)), 0.0);
}

TEST(HarmonicResidual, PlanarLaplaceEquation) {
  const MappingProblem p = testing::flat_problem(2, 1);
  const std::vector<double> x{0.4, -0.7};
  EXPECT_EQ(harmonic_residual(p, prolong(kDual, catalog::harmonic_quadratic_map(), 1, x))[0], 0.0);
  EXPECT_DOUBLE_EQ(harmonic_residual(p, prolong(kDual, catalog::paraboloid_map(), 1, x))[0], 4.0);
}

TEST(HarmonicResidual, CurvesInTheSphereAreHarmonicIffGeodesic) {
  // Line into the sphere: E_theta = h_thth Gamma^th_phph = -sin theta0 cos theta0.
  MappingProblem p = testing::metric_problem(catalog::flat_metric(testing::box(1, -1, 1)),
                                             catalog::round_sphere_metric(testing::sphere_chart()));
  const std::vector<double> t{0.3};
  for (const double th : {pi / 2, 1.0}) {
    const auto e = harmonic_residual(p, prolong(kDual, catalog::latitude_circle_map(th), 2, t));
    EXPECT_NEAR(e[0], -std::sin(th) * std::cos(th), 1e-15);
    EXPECT_NEAR(e[1], 0.0, 1e-15);
  }
  const auto e = harmonic_residual(p, prolong(kDual, catalog::great_circle_map(0.6), 2, t));
  EXPECT_LT(testing::max_abs(e), 1e-12);
}

TEST(HarmonicResidual, TraceOfTheMappingResidualMatchesTheDirectForm) {
  const MappingProblem p = testing::metric_problem(catalog::warped_metric(testing::box(3, -1, 1)),
                                                   catalog::round_sphere_metric(testing::sphere_chart()));
  for (const auto& j : random_jets(testing::box(3, -1, 1), ChartDomain({{0.5, 2.5}, {-1, 1}}, "s"), 30, 9)) {
    const auto a = harmonic_residual(p, j);
    const auto b = harmonic_residual_direct(p, j);
    EXPECT_LT(testing::max_abs_gap(a, b), 1e-12 * std::max(1.0, testing::max_abs(a)));
  }
}

TEST(Energy, DensityMatchesMatrixForm) {
  const MappingProblem p = testing::metric_problem(catalog::shear_metric(testing::box(2, -1, 1), 0.4),
                                                   catalog::warped_metric(testing::box(3, -1, 1)));
  for (const auto& j : random_jets(testing::box(2, -1, 1), testing::box(3, -1, 1), 20, 4))
    EXPECT_NEAR(energy_density(p, j, false), energy_density_direct(p, j), 1e-13);
}

TEST(Energy, FunctionalOfClosedFormMaps) {
  MappingProblem p = testing::flat_problem(1, 1);
  const ChartDomain unit = ChartDomain::box(1, 0.0, 1.0, "unit");
  EXPECT_NEAR(energy_functional(kDual, p, catalog::identity_map(), unit, 100), 0.5, 1e-14);
  EXPECT_NEAR(energy_functional(kDual, p, catalog::sine_map(), unit, 10000), pi * pi / 4.0, 1e-6);
  EXPECT_NEAR(energy_functional(kFd, p, catalog::sine_map(), unit, 10000), pi * pi / 4.0, 1e-6);
  EXPECT_EQ(energy_functional(kDual, p, catalog::constant_map({0.5}), unit, 50), 0.0);
}

TEST(Energy, WeightedFunctionalUsesTheRiemannianVolume) {
  // theta -> theta on the sphere: density 1/2, volume sin theta.
  MappingProblem p = testing::metric_problem(catalog::round_sphere_metric(testing::sphere_chart()),
                                             catalog::flat_metric(testing::box(2, -10, 10)));
  const Rule theta([]<class T>(std::span<const T> x) { return std::vector<T>{x[0], T(0.0)}; });
  const ChartDomain region({{0.5, 2.5}, {-0.5, 0.5}}, "r");
  const double expect = 0.5 * (std::cos(0.5) - std::cos(2.5));
  EXPECT_NEAR(energy_functional(kDual, p, theta, region, 400), expect, 1e-5);
  EXPECT_NEAR(energy_functional(kDual, p, theta, region, 400, false), 1.0, 1e-10);
}

TEST(Geodesics, FlatLinesAreStraight) {
  const ConnectionField flat = ConnectionField::zero(testing::box(2, -5, 5));
  const Trajectory tr = integrate_geodesic(flat, {{0.0, 0.0}, {1.0, -0.5}, 0.0}, 2.0, 0.01);
  ASSERT_FALSE(tr.exited);
  EXPECT_NEAR(tr.states.back().t, 2.0, 1e-14);
  EXPECT_NEAR(tr.states.back().position[0], 2.0, 1e-13);
  EXPECT_NEAR(tr.states.back().position[1], -1.0, 1e-13);
}

TEST(Geodesics, EquatorIsAClosedGeodesic) {
  const ConnectionField c = wide_sphere_connection();
  const Trajectory tr = integrate_geodesic(c, {{pi / 2, 0.0}, {0.0, 1.0}, 0.0}, 2 * pi, 1e-2);
  ASSERT_FALSE(tr.exited);
  for (const auto& s : tr.states) EXPECT_NEAR(s.position[0], pi / 2, 1e-10);
  EXPECT_NEAR(tr.states.back().position[1], 2 * pi, 1e-6);
}

TEST(Geodesics, TiltedGreatCircleReturnsAndConservesSpeed) {
  const ConnectionField c = wide_sphere_connection();
  const double a = 0.8;
  const Trajectory tr = integrate_geodesic(c, {{pi / 2, 0.0}, {std::sin(a), std::cos(a)}, 0.0}, 2 * pi, 1e-3);
  ASSERT_FALSE(tr.exited);
  EXPECT_NEAR(tr.states.back().position[0], pi / 2, 1e-6);
  EXPECT_NEAR(tr.states.back().position[1], 2 * pi, 1e-6);
  for (const auto& s : tr.states) {
    const double st = std::sin(s.position[0]);
    const double speed = s.velocity[0] * s.velocity[0] + st * st * s.velocity[1] * s.velocity[1];
    EXPECT_NEAR(speed, 1.0, 1e-8);
  }
}

TEST(Geodesics, LeavingTheChartEndsTheTrajectory) {
  const ConnectionField flat = ConnectionField::zero(testing::box(1, -1, 1));
  const Trajectory tr = integrate_geodesic(flat, {{0.0}, {1.0}, 0.0}, 3.0, 0.1);
  EXPECT_TRUE(tr.exited);
  EXPECT_LT(tr.states.back().position[0], 1.0);
  EXPECT_THROW(integrate_geodesic(flat, {{0.0}, {1.0}, 0.0}, 1.0, 0.0), ConfigError);
}

TEST(ImageDefect, IdentityAndProjections) {
  const MappingProblem flat = testing::flat_problem(2, 2);
  EXPECT_LT(geodesic_image_defect(kDual, flat, catalog::identity_map(), {{0.0, 0.0}, {0.3, 0.2}, 0.0}, 1.0, 1e-3)
                .defect,
            1e-6);
  const MappingProblem gp = gnomonic_problem();
  const MappingProblem sp = sphere_to_plane();
  SampleStream s(5);
  for (int k = 0; k < 10; ++k) {
    const double a = s.uniform(0.0, 2 * pi);
    const GeodesicState s0{{s.uniform(1.2, 1.9), s.uniform(-0.3, 0.3)}, {std::cos(a), std::sin(a)}, 0.0};
    const ImageDefect d = geodesic_image_defect(kDual, gp, catalog::gnomonic_map(), s0, 0.3, 1e-3);
    EXPECT_GT(d.evaluated, 100u);
    EXPECT_LT(d.defect, 1e-5);
  }
  const GeodesicState s0{{1.3, 0.0}, {0.6, 0.8}, 0.0};
  EXPECT_GT(geodesic_image_defect(kDual, sp, catalog::stereographic_map(), s0, 0.3, 1e-3).defect, 1e-2);
}

}  // namespace
}  // namespace geovar

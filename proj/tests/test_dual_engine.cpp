#include <cmath>
#include <vector>

#include "support.hpp"

namespace geovar {
namespace {

using testing::kDual;
using testing::kFd;

TEST(Dual, ProductAndQuotientRules) {
  const D1 x(2.0, 1.0);
  const D1 y = x * x / (x + 1.0);
  // d/dx x^2/(x+1) = (x^2 + 2x)/(x+1)^2 = 8/9 at x = 2
  EXPECT_DOUBLE_EQ(y.v, 4.0 / 3.0);
  EXPECT_NEAR(y.d, 8.0 / 9.0, 1e-15);
}

TEST(Dual, ElementaryFunctionsMatchClosedForms) {
  const double a = 0.7;
  const D1 x(a, 1.0);
  EXPECT_NEAR(sin(x).d, std::cos(a), 1e-15);
  EXPECT_NEAR(cos(x).d, -std::sin(a), 1e-15);
  EXPECT_NEAR(tan(x).d, 1.0 / (std::cos(a) * std::cos(a)), 1e-14);
  EXPECT_NEAR(exp(x).d, std::exp(a), 1e-15);
  EXPECT_NEAR(log(x).d, 1.0 / a, 1e-15);
  EXPECT_NEAR(sqrt(x).d, 0.5 / std::sqrt(a), 1e-15);
  EXPECT_NEAR(acos(x).d, -1.0 / std::sqrt(1.0 - a * a), 1e-14);
  EXPECT_NEAR(atan(x).d, 1.0 / (1.0 + a * a), 1e-15);
}

TEST(Dual, NestedDualsGiveHigherDerivatives) {
  // sin''' = -cos
  using T = D3;
  const double a = 0.3;
  T x = a;
  x.d = D2(1.0);
  x.v.d = D1(1.0);
  x.v.v.d = 1.0;
  const T y = sin(x);
  EXPECT_NEAR(y.d.d.d, -std::cos(a), 1e-14);
  EXPECT_EQ(dual_depth_v<D5>, kMaxDualDepth);
}

TEST(Engine, DirectionalDerivativeBothEngines) {
  auto f = []<class T>(std::span<const T> x) {
    using std::sin;
    return std::vector<T>{x[0] * x[0] * x[1], sin(x[1])};
  };
  const std::vector<double> x{1.5, 0.4}, dir{0.2, -1.0};
  const double expect0 = 2 * 1.5 * 0.4 * 0.2 + 1.5 * 1.5 * -1.0;
  const double expect1 = std::cos(0.4) * -1.0;
  for (const auto& e : {kDual, kFd}) {
    const auto d = directional_derivative(e, f, std::span<const double>(x), std::span<const double>(dir));
    EXPECT_NEAR(d[0], expect0, e.kind == EngineKind::dual ? 1e-15 : 1e-8) << e.name();
    EXPECT_NEAR(d[1], expect1, e.kind == EngineKind::dual ? 1e-15 : 1e-8) << e.name();
  }
}

TEST(Engine, HessianIsSymmetricAndExact) {
  auto f = []<class T>(std::span<const T> x) {
    using std::exp;
    return std::vector<T>{exp(x[0]) * x[1] * x[1]};
  };
  const std::vector<double> x{0.2, 1.1};
  const Tensor<double> h = hessian(kDual, f, std::span<const double>(x));
  EXPECT_NEAR(h(0, 0, 0), std::exp(0.2) * 1.21, 1e-14);
  EXPECT_NEAR(h(0, 1, 0), 2.0 * std::exp(0.2) * 1.1, 1e-14);
  EXPECT_DOUBLE_EQ(h(0, 1, 0), h(1, 0, 0));
  EXPECT_NEAR(h(1, 1, 0), 2.0 * std::exp(0.2), 1e-14);
}

TEST(Engine, NestingBeyondTheLimitThrows) {
  auto f = []<class T>(std::span<const T> x) { return std::vector<T>{x[0]}; };
  const std::vector<D5> x{D5(1.0)}, dir{D5(1.0)};
  EXPECT_THROW(directional_derivative(kDual, f, std::span<const D5>(x), std::span<const D5>(dir)),
               NestingDepthExceeded);
  // The finite-difference engine has no nesting limit.
  EXPECT_NO_THROW(directional_derivative(kFd, f, std::span<const D5>(x), std::span<const D5>(dir)));
}

TEST(Engine, FiniteDifferenceErrorIsFourthOrder) {
  auto f = []<class T>(std::span<const T> x) {
    using std::exp;
    return std::vector<T>{exp(x[0])};
  };
  const std::vector<double> x{0.5}, dir{1.0};
  auto err = [&](double h) {
    return std::abs(directional_derivative(DerivativeEngine::fd(h), f, std::span<const double>(x),
                                           std::span<const double>(dir))[0] -
                    std::exp(0.5));
  };
  // Halving h cuts the error by about 16.
  EXPECT_NEAR(err(0.04) / err(0.02), 16.0, 0.5);
}

TEST(Tensor, DeterminantAndInverse) {
  Tensor<double> a({3, 3});
  const double v[] = {4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2};
  std::copy(std::begin(v), std::end(v), a.flat().begin());
  const double det = 4 * (3 * 2 - 0.04) - 1 * (2 - 0.1) + 0.5 * (0.2 - 1.5);
  EXPECT_NEAR(determinant(a), det, 1e-12);
  const Tensor<double> inv = checked_inverse(a, 1e-10, "test");
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += inv(i, k) * a(k, j);
      EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Tensor, SingularMatrixIsRejected) {
  Tensor<double> a({2, 2});
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 4.0;
  EXPECT_THROW(checked_inverse(a, 1e-10, "test"), SingularMetric);
}

TEST(Chart, RejectsEmptyIntervalsAndReportsExits) {
  EXPECT_THROW(ChartDomain({{1.0, 1.0}}, "bad"), ConfigError);
  EXPECT_THROW(ChartDomain({}, "bad"), ConfigError);
  const ChartDomain d = ChartDomain::box(2, -1.0, 1.0, "sq");
  const std::vector<double> out{0.0, 1.5};
  EXPECT_FALSE(d.contains(std::span<const double>(out)));
  EXPECT_THROW(d.require(std::span<const double>(out), "test"), DomainExit);
}

TEST(Chart, SamplingIsSeededAndInside) {
  const ChartDomain d = ChartDomain::box(3, -2.0, 0.5, "b");
  const auto a = sample_points(d, 50, 42);
  const auto b = sample_points(d, 50, 42);
  const auto c = sample_points(d, 50, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& p : a) EXPECT_TRUE(d.contains(std::span<const double>(p)));
  EXPECT_EQ(grid_points(d, 4, 1).size(), 64u);
}

}  // namespace
}  // namespace geovar

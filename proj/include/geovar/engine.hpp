#pragma once

// Derivative engines. Every derivative in the library goes through
// directional_derivative, which either seeds a dual tangent or applies a
// five-point central stencil. Functions passed in must be generic over the
// scalar type: callable with std::span<const S> for S = T and S = Dual<T>.

#include <span>
#include <string>
#include <vector>

#include "geovar/dual.hpp"
#include "geovar/errors.hpp"
#include "geovar/tensor.hpp"

namespace geovar {

enum class EngineKind { dual, fd };

/// Default central-difference step. Nested differences (up to four deep in
/// the Helmholtz third condition) need a step far larger than the
/// single-level optimum.
inline constexpr double kDefaultFdStep = 5e-3;

struct DerivativeEngine {
  EngineKind kind = EngineKind::dual;
  double fd_step = kDefaultFdStep;

  static DerivativeEngine dual() { return {EngineKind::dual, kDefaultFdStep}; }
  static DerivativeEngine fd(double step = kDefaultFdStep) {
    return {EngineKind::fd, step};
  }

  /// Distance a stencil reaches beyond the evaluation point.
  double stencil_radius() const { return kind == EngineKind::fd ? 2.0 * fd_step : 0.0; }

  std::string name() const { return kind == EngineKind::dual ? "dual" : "fd"; }
};

/// D f(x)[dir] for a vector-valued generic function f.
template <class T, class F>
std::vector<T> directional_derivative(const DerivativeEngine& engine, const F& f,
                                      std::span<const T> x,
                                      std::span<const T> dir) {
  const std::size_t n = x.size();
  if (dir.size() != n) throw DimensionMismatch("directional_derivative");
  if (engine.kind == EngineKind::dual) {
    if constexpr (dual_depth_v<T> >= kMaxDualDepth) {
      throw NestingDepthExceeded("dual derivatives nested deeper than " +
                                 std::to_string(kMaxDualDepth));
    } else {
      std::vector<Dual<T>> xd(n);
      for (std::size_t k = 0; k < n; ++k) xd[k] = Dual<T>(x[k], dir[k]);
      const std::vector<Dual<T>> y = f(std::span<const Dual<T>>(xd));
      std::vector<T> out(y.size());
      for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k].d;
      return out;
    }
  }
  const double h = engine.fd_step;
  auto shifted = [&](double s) {
    std::vector<T> xs(x.begin(), x.end());
    for (std::size_t k = 0; k < n; ++k) xs[k] = xs[k] + (s * h) * dir[k];
    return f(std::span<const T>(xs));
  };
  const std::vector<T> p2 = shifted(2.0);
  const std::vector<T> p1 = shifted(1.0);
  const std::vector<T> m1 = shifted(-1.0);
  const std::vector<T> m2 = shifted(-2.0);
  std::vector<T> out(p1.size());
  const double w = 1.0 / (12.0 * h);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = ((m2[k] - p2[k]) + 8.0 * (p1[k] - m1[k])) * w;
  return out;
}

template <class T, class F>
std::vector<T> directional_derivative(const DerivativeEngine& engine, const F& f,
                                      const std::vector<T>& x,
                                      const std::vector<T>& dir) {
  return directional_derivative(engine, f, std::span<const T>(x),
                                std::span<const T>(dir));
}

/// Partial derivative along coordinate axis k.
template <class T, class F>
std::vector<T> partial_derivative(const DerivativeEngine& engine, const F& f,
                                  std::span<const T> x, std::size_t k) {
  std::vector<T> dir(x.size(), T(0.0));
  dir[k] = T(1.0);
  return directional_derivative(engine, f, x, std::span<const T>(dir));
}

/// Jacobian with layout (axis, output): J(k, a) = d f_a / d x^k, restricted
/// to the axes [first, first + count).
template <class T, class F>
Tensor<T> jacobian(const DerivativeEngine& engine, const F& f,
                   std::span<const T> x, std::size_t first, std::size_t count) {
  Tensor<T> jac;
  for (std::size_t k = 0; k < count; ++k) {
    const std::vector<T> col = partial_derivative(engine, f, x, first + k);
    if (k == 0) jac = Tensor<T>({count, col.size()});
    for (std::size_t a = 0; a < col.size(); ++a) jac(k, a) = col[a];
  }
  return jac;
}

template <class T, class F>
Tensor<T> jacobian(const DerivativeEngine& engine, const F& f,
                   std::span<const T> x) {
  return jacobian(engine, f, x, 0, x.size());
}

/// Second derivatives with layout (axis, axis, output) over all axes.
template <class T, class F>
Tensor<T> hessian(const DerivativeEngine& engine, const F& f,
                  std::span<const T> x) {
  const std::size_t n = x.size();
  auto grad = [&]<class S>(std::span<const S> z) {
    return jacobian(engine, f, z).storage();
  };
  const Tensor<T> outer = jacobian(engine, grad, x);  // (b, a*out)
  const std::size_t out_size = outer.extent(1) / n;
  Tensor<T> h({n, n, out_size});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t o = 0; o < out_size; ++o)
        h(b, a, o) = outer(b, a * out_size + o);
  return h;
}

}  // namespace geovar

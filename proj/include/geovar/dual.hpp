#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<...>> gives higher
// derivatives: each level carries one directional tangent.

#include <cmath>
#include <cstddef>
#include <ostream>
#include <type_traits>

namespace geovar {

template <class T>
struct Dual;

template <class T>
struct dual_depth : std::integral_constant<std::size_t, 0> {};

template <class T>
struct dual_depth<Dual<T>>
    : std::integral_constant<std::size_t, 1 + dual_depth<T>::value> {};

template <class T>
inline constexpr std::size_t dual_depth_v = dual_depth<T>::value;

template <class T>
inline constexpr bool is_dual_v = dual_depth_v<T> > 0;

template <class S>
concept Arithmetic = std::is_arithmetic_v<S>;

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // tangent

  constexpr Dual() = default;
  constexpr Dual(const T& value, const T& tangent) : v(value), d(tangent) {}
  // Implicit lift of plain numbers and of lower-level scalars.
  template <Arithmetic S>
  constexpr Dual(S value) : v(static_cast<double>(value)), d(0.0) {}  // NOLINT
  template <class U>
    requires(is_dual_v<U> && dual_depth_v<U> < dual_depth_v<Dual<T>>)
  constexpr Dual(const U& value) : v(value), d(0.0) {}  // NOLINT

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1.0) / o.v;
    v *= inv;
    d = (d - v * o.d) * inv;
    return *this;
  }
};

/// Innermost double carried by a (possibly nested) scalar.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
Dual<T> operator+(const Dual<T>& a) {
  return a;
}

template <class T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) {
  return a += b;
}
template <class T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) {
  return a -= b;
}
template <class T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) {
  return a *= b;
}
template <class T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) {
  return a /= b;
}

// Mixed operations with anything that lifts into Dual<T>.
#define GEOVAR_DUAL_MIXED_OP(op)                                             \
  template <class T, class S>                                                \
    requires std::is_constructible_v<Dual<T>, S> &&                          \
             (!std::is_same_v<std::remove_cvref_t<S>, Dual<T>>)              \
  Dual<T> operator op(const Dual<T>& a, const S& b) {                        \
    return a op Dual<T>(b);                                                  \
  }                                                                          \
  template <class T, class S>                                                \
    requires std::is_constructible_v<Dual<T>, S> &&                          \
             (!std::is_same_v<std::remove_cvref_t<S>, Dual<T>>)              \
  Dual<T> operator op(const S& a, const Dual<T>& b) {                        \
    return Dual<T>(a) op b;                                                  \
  }

GEOVAR_DUAL_MIXED_OP(+)
GEOVAR_DUAL_MIXED_OP(-)
GEOVAR_DUAL_MIXED_OP(*)
GEOVAR_DUAL_MIXED_OP(/)
#undef GEOVAR_DUAL_MIXED_OP

// Comparisons look at the innermost value only.
template <class T, class S>
bool operator<(const Dual<T>& a, const S& b) {
  return value_of(a) < value_of(b);
}
template <class T, class S>
bool operator>(const Dual<T>& a, const S& b) {
  return value_of(a) > value_of(b);
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), a.d * cos(a.v)};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -(a.d * sin(a.v))};
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
  using std::cos;
  using std::tan;
  const T c = cos(a.v);
  return {tan(a.v), a.d / (c * c)};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return {e, a.d * e};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.v), a.d / a.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.v, p), a.d * (p * pow(a.v, p - 1.0))};
}
template <class T>
Dual<T> atan(const Dual<T>& a) {
  using std::atan;
  return {atan(a.v), a.d / (1.0 + a.v * a.v)};
}
template <class T>
Dual<T> acos(const Dual<T>& a) {
  using std::acos;
  using std::sqrt;
  return {acos(a.v), -(a.d / sqrt(1.0 - a.v * a.v))};
}
template <class T>
Dual<T> asin(const Dual<T>& a) {
  using std::asin;
  using std::sqrt;
  return {asin(a.v), a.d / sqrt(1.0 - a.v * a.v)};
}
template <class T>
Dual<T> abs(const Dual<T>& a) {
  return value_of(a) < 0.0 ? -a : a;
}

template <class T>
std::ostream& operator<<(std::ostream& os, const Dual<T>& a) {
  return os << '(' << a.v << " + " << a.d << "e)";
}

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;
using D5 = Dual<D4>;

/// Deepest nesting any evaluation rule is instantiated for.
inline constexpr std::size_t kMaxDualDepth = 5;

}  // namespace geovar

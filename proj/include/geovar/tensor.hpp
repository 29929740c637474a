#pragma once

// Small dense arrays with runtime shape, plus the linear algebra the
// geometry needs (inverse, determinant) written generically so that it
// works for nested dual scalars.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <vector>

#include "geovar/dual.hpp"
#include "geovar/errors.hpp"

namespace geovar {

inline constexpr std::size_t kMaxRank = 7;

template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::initializer_list<std::size_t> shape) {
    reshape(std::span<const std::size_t>(shape.begin(), shape.size()));
  }
  explicit Tensor(std::span<const std::size_t> shape) { reshape(shape); }

  std::size_t rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }
  std::span<const std::size_t> shape() const { return {shape_.data(), rank_}; }

  template <class... I>
  T& operator()(I... idx) {
    return data_[offset(idx...)];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return data_[offset(idx...)];
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

 private:
  void reshape(std::span<const std::size_t> shape) {
    assert(shape.size() <= kMaxRank);
    rank_ = shape.size();
    std::size_t total = 1;
    for (std::size_t a = 0; a < rank_; ++a) {
      shape_[a] = shape[a];
      total *= shape[a];
    }
    data_.assign(total, T(0.0));
  }

  template <class... I>
  std::size_t offset(I... idx) const {
    static_assert(sizeof...(I) <= kMaxRank);
    assert(sizeof...(I) == rank_);
    const std::array<std::size_t, sizeof...(I)> ids{
        static_cast<std::size_t>(idx)...};
    std::size_t off = 0;
    for (std::size_t a = 0; a < ids.size(); ++a) {
      assert(ids[a] < shape_[a]);
      off = off * shape_[a] + ids[a];
    }
    return off;
  }

  std::array<std::size_t, kMaxRank> shape_{};
  std::size_t rank_ = 0;
  std::vector<T> data_;
};

/// Copies a flat buffer into a tensor of the given shape.
template <class T>
Tensor<T> tensor_from(std::initializer_list<std::size_t> shape,
                      std::span<const T> values) {
  Tensor<T> out(shape);
  if (values.size() != out.size()) {
    throw DimensionMismatch("tensor_from: expected " +
                            std::to_string(out.size()) + " values, got " +
                            std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), out.flat().begin());
  return out;
}

/// Max-norm of the innermost values.
template <class T>
double max_norm(const Tensor<T>& t) {
  double m = 0.0;
  for (const auto& x : t.flat()) m = std::max(m, std::abs(value_of(x)));
  return m;
}

template <class T>
double max_norm(std::span<const T> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(value_of(x)));
  return m;
}

template <class T>
double max_norm(const std::vector<T>& v) {
  return max_norm(std::span<const T>(v));
}

/// Elementwise difference; shapes must agree.
template <class T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("tensor difference");
  Tensor<T> out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.flat()[k] -= b.flat()[k];
  return out;
}

/// Max |a-b| over matching entries.
template <class T>
double max_abs_diff(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw DimensionMismatch("max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    m = std::max(m, std::abs(value_of(a[k]) - value_of(b[k])));
  return m;
}


/// Determinant of a square matrix by Gaussian elimination with partial
/// pivoting on the innermost value.
template <class T>
T determinant(Tensor<T> a) {
  const std::size_t n = a.extent(0);
  T det(1.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(value_of(a(r, c))) > std::abs(value_of(a(piv, c)))) piv = r;
    if (value_of(a(piv, c)) == 0.0) return T(0.0);
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(c, k), a(piv, k));
      det = -det;
    }
    det = det * a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const T f = a(r, c) / a(c, c);
      for (std::size_t k = c; k < n; ++k) a(r, k) = a(r, k) - f * a(c, k);
    }
  }
  return det;
}

/// Inverse by Gauss-Jordan elimination. Throws SingularMetric when a pivot
/// vanishes.
template <class T>
Tensor<T> inverse(Tensor<T> a) {
  const std::size_t n = a.extent(0);
  Tensor<T> inv({n, n});
  for (std::size_t i = 0; i < n; ++i) inv(i, i) = T(1.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(value_of(a(r, c))) > std::abs(value_of(a(piv, c)))) piv = r;
    if (value_of(a(piv, c)) == 0.0) throw SingularMetric("inverse: zero pivot");
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a(c, k), a(piv, k));
        std::swap(inv(c, k), inv(piv, k));
      }
    }
    const T p = T(1.0) / a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) = a(c, k) * p;
      inv(c, k) = inv(c, k) * p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const T f = a(r, c);
      if (value_of(f) == 0.0 && !is_dual_v<T>) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) = a(r, k) - f * a(c, k);
        inv(r, k) = inv(r, k) - f * inv(c, k);
      }
    }
  }
  return inv;
}

}  // namespace geovar

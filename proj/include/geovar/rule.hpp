#pragma once

// Type erasure for evaluation rules that must run on every scalar in the
// dual tower. A rule is built from a generic lambda and stores one
// std::function per scalar type.

#include <functional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "geovar/dual.hpp"

namespace geovar {

template <template <class> class Fn, class... Ts>
class PolyFunction {
 public:
  PolyFunction() = default;

  template <class F>
    requires(!std::is_same_v<std::remove_cvref_t<F>, PolyFunction>)
  explicit PolyFunction(F f) : fns_(Fn<Ts>(f)...) {}

  template <class T, class... Args>
  decltype(auto) call(Args&&... args) const {
    return std::get<Fn<T>>(fns_)(std::forward<Args>(args)...);
  }

  explicit operator bool() const { return static_cast<bool>(std::get<0>(fns_)); }

 private:
  std::tuple<Fn<Ts>...> fns_;
};

template <class T>
using PointFn = std::function<std::vector<T>(std::span<const T>)>;

/// Vector-valued function of a chart point, callable on double and on
/// every dual level up to kMaxDualDepth.
class Rule {
 public:
  Rule() = default;
  template <class F>
    requires(!std::is_same_v<std::remove_cvref_t<F>, Rule>)
  explicit Rule(F f) : fn_(std::move(f)) {}

  template <class T>
  std::vector<T> operator()(std::span<const T> x) const {
    return fn_.template call<T>(x);
  }
  template <class T>
  std::vector<T> operator()(const std::vector<T>& x) const {
    return fn_.template call<T>(std::span<const T>(x));
  }

  explicit operator bool() const { return static_cast<bool>(fn_); }

 private:
  PolyFunction<PointFn, double, D1, D2, D3, D4, D5> fn_;
};

}  // namespace geovar

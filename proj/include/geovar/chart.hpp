#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geovar/dual.hpp"
#include "geovar/errors.hpp"

namespace geovar {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Coordinate box of a single chart.
class ChartDomain {
 public:
  ChartDomain() = default;
  ChartDomain(std::vector<Interval> bounds, std::string label)
      : bounds_(std::move(bounds)), label_(std::move(label)) {
    if (bounds_.empty()) throw ConfigError("chart '" + label_ + "' has dimension 0");
    for (const auto& iv : bounds_)
      if (!(iv.hi > iv.lo))
        throw ConfigError("chart '" + label_ + "' has an empty interval");
  }

  static ChartDomain box(std::size_t dim, double lo, double hi, std::string label) {
    return ChartDomain(std::vector<Interval>(dim, Interval{lo, hi}), std::move(label));
  }

  std::size_t dimension() const { return bounds_.size(); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const std::string& label() const { return label_; }

  template <class T>
  bool contains(std::span<const T> p) const {
    if (p.size() != bounds_.size()) return false;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double v = value_of(p[k]);
      if (!(v >= bounds_[k].lo && v <= bounds_[k].hi)) return false;
    }
    return true;
  }

  template <class T>
  void require(std::span<const T> p, const char* what) const {
    if (p.size() != bounds_.size())
      throw DimensionMismatch(std::string(what) + ": point of dimension " +
                              std::to_string(p.size()) + " on chart '" + label_ +
                              "' of dimension " + std::to_string(bounds_.size()));
    if (!contains(p)) {
      std::string msg = std::string(what) + ": point (";
      for (std::size_t k = 0; k < p.size(); ++k)
        msg += (k ? ", " : "") + std::to_string(value_of(p[k]));
      throw DomainExit(msg + ") outside chart '" + label_ + "'");
    }
  }

  /// Same chart with every interval pulled in by margin on both sides.
  ChartDomain shrunk(double margin) const {
    std::vector<Interval> b = bounds_;
    for (auto& iv : b) {
      iv.lo += margin;
      iv.hi -= margin;
    }
    return ChartDomain(std::move(b), label_);
  }

 private:
  std::vector<Interval> bounds_;
  std::string label_;
};

/// Seeded uniform doubles in [0,1), independent of the standard library's
/// distribution implementations so sample sets are reproducible everywhere.
class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed) : rng_(seed) {}
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::uint64_t next() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

inline std::vector<double> sample_point(const ChartDomain& d, SampleStream& s) {
  std::vector<double> p(d.dimension());
  for (std::size_t k = 0; k < p.size(); ++k)
    p[k] = s.uniform(d.bounds()[k].lo, d.bounds()[k].hi);
  return p;
}

inline std::vector<std::vector<double>> sample_points(const ChartDomain& d,
                                                      std::size_t count,
                                                      std::uint64_t seed) {
  SampleStream s(seed);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_point(d, s));
  return out;
}

/// Tensor-product grid: per_axis seeded values on each axis, all combinations.
inline std::vector<std::vector<double>> grid_points(const ChartDomain& d,
                                                    std::size_t per_axis,
                                                    std::uint64_t seed) {
  SampleStream s(seed);
  std::vector<std::vector<double>> axes(d.dimension());
  for (std::size_t k = 0; k < d.dimension(); ++k)
    for (std::size_t i = 0; i < per_axis; ++i)
      axes[k].push_back(s.uniform(d.bounds()[k].lo, d.bounds()[k].hi));
  std::vector<std::vector<double>> out{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out)
      for (double v : axis) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace geovar

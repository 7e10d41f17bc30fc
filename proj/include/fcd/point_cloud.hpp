#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "fcd/errors.hpp"

namespace fcd {

template <std::size_t D>
using Point = std::array<double, D>;

template <std::size_t D>
constexpr Point<D> operator-(const Point<D>& a, const Point<D>& b) {
  Point<D> r{};
  for (std::size_t k = 0; k < D; ++k) r[k] = a[k] - b[k];
  return r;
}

template <std::size_t D>
constexpr Point<D> operator+(const Point<D>& a, const Point<D>& b) {
  Point<D> r{};
  for (std::size_t k = 0; k < D; ++k) r[k] = a[k] + b[k];
  return r;
}

template <std::size_t D>
constexpr Point<D> operator*(double s, const Point<D>& a) {
  Point<D> r{};
  for (std::size_t k = 0; k < D; ++k) r[k] = s * a[k];
  return r;
}

template <std::size_t D>
constexpr Point<D>& operator+=(Point<D>& a, const Point<D>& b) {
  for (std::size_t k = 0; k < D; ++k) a[k] += b[k];
  return a;
}

template <std::size_t D>
constexpr double squared_distance(const Point<D>& a, const Point<D>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < D; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

template <std::size_t D>
double distance(const Point<D>& a, const Point<D>& b) {
  return std::sqrt(squared_distance(a, b));
}

template <std::size_t D>
double norm(const Point<D>& a) {
  return std::sqrt(squared_distance(a, Point<D>{}));
}

template <std::size_t D>
bool is_finite(const Point<D>& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Neumaier-compensated running sum. Keeps long reductions independent of
/// accumulation order to well below 1e-9 relative.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Ordered set of D-dimensional points. Indices are stable identifiers;
/// coordinates are checked finite on construction and on push_back.
template <std::size_t D>
class PointCloud {
  static_assert(D == 2 || D == 3, "point clouds are 2D or 3D");

 public:
  static constexpr std::size_t dim = D;
  using point_type = Point<D>;

  PointCloud() = default;

  explicit PointCloud(std::vector<Point<D>> points) : points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (!is_finite(points_[i]))
        throw InvalidInput("point " + std::to_string(i) + " has a non-finite coordinate");
  }

  PointCloud(std::initializer_list<Point<D>> points)
      : PointCloud(std::vector<Point<D>>(points)) {}

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const Point<D>& operator[](std::size_t i) const { return points_[i]; }
  Point<D>& operator[](std::size_t i) { return points_[i]; }

  void push_back(const Point<D>& p) {
    if (!is_finite(p)) throw InvalidInput("point has a non-finite coordinate");
    points_.push_back(p);
  }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  std::span<const Point<D>> points() const { return points_; }
  std::span<Point<D>> mutable_points() { return points_; }

  bool all_finite() const {
    for (const auto& p : points_)
      if (!is_finite(p)) return false;
    return true;
  }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Point<D>> points_;
};

namespace detail {

template <std::size_t D>
void require_non_empty(const PointCloud<D>& c, const char* name) {
  if (c.empty()) throw InvalidInput(std::string(name) + " point cloud is empty");
}

}  // namespace detail
}  // namespace fcd

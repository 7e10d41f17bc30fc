#pragma once

// Independent reference implementations used as test oracles. Everything here
// is a direct O(n^2) / O(n!) evaluation of the definitions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "fcd/point_cloud.hpp"

namespace oracle {

template <std::size_t D>
fcd::PointCloud<D> random_cloud(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<fcd::Point<D>> pts(n);
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  return fcd::PointCloud<D>(std::move(pts));
}

template <std::size_t D>
double dist(const fcd::Point<D>& a, const fcd::Point<D>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < D; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

/// Lowest index among the minimisers of the squared distance.
template <std::size_t D>
std::size_t brute_nearest(const fcd::PointCloud<D>& c, const fcd::Point<D>& q) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < D; ++k) d2 += (c[i][k] - q[k]) * (c[i][k] - q[k]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

/// Mean over P of min_g d^r(p, g).
template <std::size_t D>
double directional(const fcd::PointCloud<D>& P, const fcd::PointCloud<D>& G, int r) {
  double sum = 0.0;
  for (const auto& p : P) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& g : G) m = std::min(m, std::pow(dist(p, g), r));
    sum += m;
  }
  return sum / static_cast<double>(P.size());
}

template <std::size_t D>
double emd_permutations(const fcd::PointCloud<D>& P, const fcd::PointCloud<D>& G) {
  std::vector<std::size_t> perm(P.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += dist(P[i], G[perm[i]]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(P.size());
}

/// Central difference of f along coordinate k of point i.
template <std::size_t D>
double central_difference(const std::function<double(const fcd::PointCloud<D>&)>& f, fcd::PointCloud<D> P,
                          std::size_t i, std::size_t k, double h) {
  const double x = P[i][k];
  P.mutable_points()[i][k] = x + h;
  const double up = f(P);
  P.mutable_points()[i][k] = x - h;
  const double down = f(P);
  return (up - down) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/point_cloud.hpp"

namespace fcd {

enum class SampleMethod { Random, FarthestPoint };

inline SampleMethod parse_sample_method(std::string_view s) {
  if (s == "random") return SampleMethod::Random;
  if (s == "farthest-point" || s == "fps") return SampleMethod::FarthestPoint;
  throw InvalidInput("unknown sampling method '" + std::string(s) + "'");
}

/// Indices picked by farthest-point sampling, in selection order. Starts at
/// point 0; each subsequent pick maximises the distance to the picked set
/// (lowest index on ties).
template <std::size_t D>
std::vector<std::size_t> farthest_point_indices(const PointCloud<D>& cloud, std::size_t n) {
  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::vector<double> gap(cloud.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  for (std::size_t k = 0; k < n; ++k) {
    picked.push_back(next);
    const auto& p = cloud[next];
    std::size_t best = 0;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      gap[i] = std::min(gap[i], squared_distance(cloud[i], p));
      if (gap[i] > best_gap) {
        best_gap = gap[i];
        best = i;
      }
    }
    next = best;
  }
  return picked;
}

/// Draws `n` points from `cloud`. Random sampling keeps the original order of
/// the chosen points; farthest-point sampling returns them in selection order.
/// The same seed always produces the same output.
template <std::size_t D>
PointCloud<D> subsample(const PointCloud<D>& cloud, std::size_t n, SampleMethod method,
                        std::uint64_t seed) {
  if (n < 1 || n > cloud.size())
    throw InvalidInput("subsample size " + std::to_string(n) + " outside [1, " +
                       std::to_string(cloud.size()) + "]");
  std::vector<std::size_t> idx;
  if (method == SampleMethod::FarthestPoint) {
    idx = farthest_point_indices(cloud, n);
  } else {
    idx.resize(cloud.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates; only the first n slots matter.
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<Point<D>> out;
  out.reserve(n);
  for (auto i : idx) out.push_back(cloud[i]);
  return PointCloud<D>(std::move(out));
}

}  // namespace fcd

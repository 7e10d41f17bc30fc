#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/mesh.hpp"
#include "fcd/nn_index.hpp"
#include "fcd/point_cloud.hpp"

namespace fcd {

/// First order uses Euclidean distance, second order squared Euclidean.
enum class DistanceOrder { First = 1, Second = 2 };

inline DistanceOrder parse_distance_order(std::string_view s) {
  if (s == "1" || s == "l1") return DistanceOrder::First;
  if (s == "2" || s == "l2") return DistanceOrder::Second;
  throw InvalidInput("distance order must be 1 or 2, got '" + std::string(s) + "'");
}

inline double order_distance(const Neighbor& n, DistanceOrder r) {
  return r == DistanceOrder::First ? n.distance : n.squared_distance;
}

/// Nearest-neighbour matches in both directions between a prediction P and a
/// reference G: `forward[i]` is the nearest g for p_i, `backward[j]` the
/// nearest p for g_j.
struct Correspondence {
  std::vector<Neighbor> forward;
  std::vector<Neighbor> backward;
};

template <std::size_t D>
Correspondence correspond(const PointCloud<D>& P, const PointCloud<D>& G) {
  detail::require_non_empty(P, "predicted");
  detail::require_non_empty(G, "reference");
  const NNIndex<D> g_index(G);
  const NNIndex<D> p_index(P);
  return {nearest_all(P, g_index), nearest_all(G, p_index)};
}

inline double mean_distance(std::span<const Neighbor> matches, DistanceOrder r) {
  CompensatedSum s;
  for (const auto& m : matches) s += order_distance(m, r);
  return s.value() / static_cast<double>(matches.size());
}

/// The two directional Chamfer terms.
struct ChamferTerms {
  double local = 0.0;   ///< mean over P of min_g d^r(p, g)
  double global = 0.0;  ///< mean over G of min_p d^r(g, p)
};

inline ChamferTerms chamfer_terms(const Correspondence& c, DistanceOrder r) {
  return {mean_distance(c.forward, r), mean_distance(c.backward, r)};
}

template <std::size_t D>
ChamferTerms chamfer_terms(const PointCloud<D>& P, const PointCloud<D>& G, DistanceOrder r) {
  return chamfer_terms(correspond(P, G), r);
}

template <std::size_t D>
double cd_local(const PointCloud<D>& P, const PointCloud<D>& G, DistanceOrder r) {
  detail::require_non_empty(P, "predicted");
  detail::require_non_empty(G, "reference");
  return mean_distance(nearest_all(P, NNIndex<D>(G)), r);
}

template <std::size_t D>
double cd_global(const PointCloud<D>& P, const PointCloud<D>& G, DistanceOrder r) {
  return cd_local(G, P, r);
}

/// Euclidean Chamfer distance, halved: (local + global) / 2.
template <std::size_t D>
double chamfer_l1(const PointCloud<D>& P, const PointCloud<D>& G) {
  const auto t = chamfer_terms(P, G, DistanceOrder::First);
  return 0.5 * (t.local + t.global);
}

/// Squared-Euclidean Chamfer distance: local + global, no halving.
template <std::size_t D>
double chamfer_l2(const PointCloud<D>& P, const PointCloud<D>& G) {
  const auto t = chamfer_terms(P, G, DistanceOrder::Second);
  return t.local + t.global;
}

inline constexpr double kDefaultDcdTemperature = 1000.0;

/// Density-aware Chamfer distance from a precomputed correspondence. Each
/// match is discounted by how many points share the same nearest neighbour.
inline double dcd(const Correspondence& c, std::size_t p_size, std::size_t g_size, double temperature) {
  if (!(temperature > 0.0)) throw InvalidInput("dcd temperature must be positive");
  const auto g_hits = hit_counts(c.forward, g_size);
  const auto p_hits = hit_counts(c.backward, p_size);
  auto side = [&](std::span<const Neighbor> matches, const std::vector<std::size_t>& hits) {
    CompensatedSum s;
    for (const auto& m : matches)
      s += 1.0 - std::exp(-temperature * m.distance) / static_cast<double>(hits[m.index]);
    return s.value() / static_cast<double>(matches.size());
  };
  return 0.5 * (side(c.forward, g_hits) + side(c.backward, p_hits));
}

template <std::size_t D>
double dcd(const PointCloud<D>& P, const PointCloud<D>& G, double temperature = kDefaultDcdTemperature) {
  if (!(temperature > 0.0)) throw InvalidInput("dcd temperature must be positive");
  return dcd(correspond(P, G), P.size(), G.size(), temperature);
}

inline constexpr double kDefaultFscoreThreshold = 0.01;

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};

template <std::size_t D>
PrecisionRecall precision_recall(const PointCloud<D>& P, const PointCloud<D>& G, double threshold) {
  if (!(threshold > 0.0)) throw InvalidInput("f-score threshold must be positive");
  const auto c = correspond(P, G);
  auto frac = [&](const std::vector<Neighbor>& m) {
    const auto hit = std::count_if(m.begin(), m.end(), [&](const Neighbor& n) { return n.distance <= threshold; });
    return static_cast<double>(hit) / static_cast<double>(m.size());
  };
  PrecisionRecall pr{frac(c.forward), frac(c.backward), 0.0};
  if (pr.precision + pr.recall > 0.0)
    pr.fscore = 2.0 * pr.precision * pr.recall / (pr.precision + pr.recall);
  return pr;
}

template <std::size_t D>
double fscore(const PointCloud<D>& P, const PointCloud<D>& G, double threshold = kDefaultFscoreThreshold) {
  return precision_recall(P, G, threshold).fscore;
}

template <std::size_t D>
double hausdorff(const PointCloud<D>& P, const PointCloud<D>& G) {
  const auto c = correspond(P, G);
  double h = 0.0;
  for (const auto& m : c.forward) h = std::max(h, m.distance);
  for (const auto& m : c.backward) h = std::max(h, m.distance);
  return h;
}

/// Mean distance from each point of P to the closest triangle of the mesh.
inline double point_to_mesh(const PointCloud<3>& P, const TriangleMesh& mesh) {
  detail::require_non_empty(P, "predicted");
  if (mesh.empty()) throw InvalidInput("mesh has no triangles");
  CompensatedSum s;
  for (const auto& p : P) s += point_mesh_distance(p, mesh);
  return s.value() / static_cast<double>(P.size());
}

/// Mean distance from each partial-input point to its nearest output point.
template <std::size_t D>
double fidelity(const PointCloud<D>& input, const PointCloud<D>& output) {
  return cd_local(input, output, DistanceOrder::First);
}

}  // namespace fcd

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/point_cloud.hpp"

namespace fcd {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
  double squared_distance = 0.0;
};

/// Exact nearest-neighbour index over a point cloud (median-split k-d tree).
///
/// Queries return the same point a brute-force scan would: the minimum
/// squared Euclidean distance, ties resolved towards the lowest index. The
/// index owns a reordered copy of the points, so it stays valid after the
/// source cloud goes away. Immutable once built; concurrent queries are safe.
template <std::size_t D>
class NNIndex {
 public:
  explicit NNIndex(const PointCloud<D>& cloud, std::size_t leaf_size = 12)
      : leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    detail::require_non_empty(cloud, "indexed");
    std::vector<std::uint32_t> order(cloud.size());
    std::iota(order.begin(), order.end(), 0u);
    nodes_.reserve(2 * cloud.size() / leaf_size_ + 1);
    build(cloud, order, 0, static_cast<std::uint32_t>(order.size()));
    points_.reserve(order.size());
    for (auto i : order) points_.push_back(cloud[i]);
    ids_ = std::move(order);
  }

  std::size_t size() const { return points_.size(); }

  /// Original-index point lookup.
  Neighbor nearest(const Point<D>& q) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_id = std::numeric_limits<std::uint32_t>::max();
    search(0, q, best_d2, best_id);
    return {best_id, std::sqrt(best_d2), best_d2};
  }

  /// Runtime-sized query; throws InvalidInput on dimension mismatch.
  Neighbor nearest(std::span<const double> q) const {
    if (q.size() != D)
      throw InvalidInput("query has dimension " + std::to_string(q.size()) +
                         ", index has dimension " + std::to_string(D));
    Point<D> p{};
    std::copy(q.begin(), q.end(), p.begin());
    return nearest(p);
  }

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;
    std::uint32_t left = 0, right = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
  };

  std::uint32_t build(const PointCloud<D>& cloud, std::vector<std::uint32_t>& order,
                      std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    Point<D> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (auto i = begin; i < end; ++i)
      for (std::size_t k = 0; k < D; ++k) {
        lo[k] = std::min(lo[k], cloud[order[i]][k]);
        hi[k] = std::max(hi[k], cloud[order[i]][k]);
      }
    int axis = 0;
    for (std::size_t k = 1; k < D; ++k)
      if (hi[k] - lo[k] > hi[axis] - lo[axis]) axis = static_cast<int>(k);
    if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return cloud[a][axis] < cloud[b][axis]; });
    const double split = cloud[order[mid]][axis];
    const auto left = build(cloud, order, begin, mid);
    const auto right = build(cloud, order, mid, end);
    Node& n = nodes_[id];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
  }

  void search(std::uint32_t node_id, const Point<D>& q, double& best_d2,
              std::uint32_t& best_id) const {
    const Node& n = nodes_[node_id];
    if (n.axis < 0) {
      for (auto i = n.begin; i < n.end; ++i) {
        const double d2 = squared_distance(q, points_[i]);
        if (d2 < best_d2 || (d2 == best_d2 && ids_[i] < best_id)) {
          best_d2 = d2;
          best_id = ids_[i];
        }
      }
      return;
    }
    // Left holds coordinates <= split, right >= split. The plane bound is a
    // valid lower bound in floating point too, so pruning on '>' stays exact
    // and keeps equal-distance candidates reachable for the index tie-break.
    const double diff = q[n.axis] - n.split;
    const auto near = diff <= 0.0 ? n.left : n.right;
    const auto far = diff <= 0.0 ? n.right : n.left;
    search(near, q, best_d2, best_id);
    if (diff * diff <= best_d2) search(far, q, best_d2, best_id);
  }

  std::size_t leaf_size_;
  std::vector<Node> nodes_;
  std::vector<Point<D>> points_;
  std::vector<std::uint32_t> ids_;
};

template <std::size_t D>
NNIndex<D> build_index(const PointCloud<D>& cloud) {
  return NNIndex<D>(cloud);
}

template <std::size_t D>
Neighbor nearest(const NNIndex<D>& index, const Point<D>& q) {
  return index.nearest(q);
}

/// Nearest indexed point for every query point, in query order.
template <std::size_t D>
std::vector<Neighbor> nearest_all(const PointCloud<D>& queries, const NNIndex<D>& index) {
  std::vector<Neighbor> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(index.nearest(q));
  return out;
}

/// count[j] = number of queries whose nearest indexed point is j.
inline std::vector<std::size_t> hit_counts(std::span<const Neighbor> matches,
                                           std::size_t indexed_size) {
  std::vector<std::size_t> counts(indexed_size, 0);
  for (const auto& m : matches) ++counts[m.index];
  return counts;
}

template <std::size_t D>
std::vector<std::size_t> nearest_hit_counts(const PointCloud<D>& queries, const NNIndex<D>& index) {
  const auto matches = nearest_all(queries, index);
  return hit_counts(matches, index.size());
}

}  // namespace fcd

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/point_cloud.hpp"

namespace fcd {

/// EMD is reported as the mean matched distance by default so that it sits on
/// the same scale as Chamfer terms. `Sum` gives the raw transport cost.
enum class EmdReduction { Mean, Sum };

inline constexpr std::size_t kExactEmdMaxPoints = 1024;

namespace detail {

template <std::size_t D>
void require_same_size(const PointCloud<D>& P, const PointCloud<D>& G) {
  require_non_empty(P, "predicted");
  require_non_empty(G, "reference");
  if (P.size() != G.size())
    throw InvalidInput("EMD needs equal-size clouds, got " + std::to_string(P.size()) + " and " +
                       std::to_string(G.size()));
}

template <std::size_t D>
double assignment_cost(const PointCloud<D>& P, const PointCloud<D>& G,
                       const std::vector<std::size_t>& assign, EmdReduction reduction) {
  CompensatedSum s;
  for (std::size_t i = 0; i < assign.size(); ++i) s += distance(P[i], G[assign[i]]);
  return reduction == EmdReduction::Sum ? s.value() : s.value() / static_cast<double>(assign.size());
}

}  // namespace detail

/// Minimum-cost perfect matching P -> G under Euclidean cost, O(n^3)
/// shortest-augmenting-path Hungarian method with dual potentials.
/// Returns assign[i] = index in G matched to P[i].
template <std::size_t D>
std::vector<std::size_t> optimal_assignment(const PointCloud<D>& P, const PointCloud<D>& G) {
  detail::require_same_size(P, G);
  const std::size_t n = P.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based rows/cols; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = distance(P[i0 - 1], G[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t j = 1; j <= n; ++j) assign[match[j] - 1] = j - 1;
  return assign;
}

/// Exact Earth Mover's distance between equal-size clouds (up to 1024 points).
template <std::size_t D>
double emd_exact(const PointCloud<D>& P, const PointCloud<D>& G, EmdReduction reduction = EmdReduction::Mean) {
  detail::require_same_size(P, G);
  if (P.size() > kExactEmdMaxPoints)
    throw InvalidInput("exact EMD is limited to " + std::to_string(kExactEmdMaxPoints) +
                       " points; use emd_approx for " + std::to_string(P.size()));
  return detail::assignment_cost(P, G, optimal_assignment(P, G), reduction);
}

struct AuctionResult {
  std::vector<std::size_t> assignment;  ///< best complete matching seen
  double cost = 0.0;                    ///< its transport cost (sum)
  std::size_t bids = 0;
  std::size_t phases_completed = 0;
};

/// Gauss-Seidel auction with epsilon scaling (Bertsekas). Every completed
/// phase yields a feasible matching; the best one is kept, so the cost never
/// increases with a larger bid budget and never drops below the optimum. A
/// phase run at `epsilon` is within n * epsilon of the optimal sum.
template <std::size_t D>
AuctionResult auction_assignment(const PointCloud<D>& P, const PointCloud<D>& G, std::size_t max_bids,
                                 double epsilon) {
  detail::require_same_size(P, G);
  if (!(epsilon > 0.0)) throw InvalidInput("auction epsilon must be positive");
  const std::size_t n = P.size();
  constexpr std::size_t unassigned = std::numeric_limits<std::size_t>::max();

  AuctionResult best;
  best.assignment.resize(n);
  std::iota(best.assignment.begin(), best.assignment.end(), std::size_t{0});
  auto sum_cost = [&](const std::vector<std::size_t>& a) {
    return detail::assignment_cost(P, G, a, EmdReduction::Sum);
  };
  best.cost = sum_cost(best.assignment);
  if (n == 1) return best;

  std::vector<double> cost(n * n);
  double max_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = distance(P[i], G[j]);
      max_cost = std::max(max_cost, cost[i * n + j]);
    }

  std::vector<double> price(n, 0.0);
  std::vector<std::size_t> owner(n), assigned(n);
  double eps = std::max(max_cost / 4.0, epsilon);
  while (true) {
    std::fill(owner.begin(), owner.end(), unassigned);
    std::fill(assigned.begin(), assigned.end(), unassigned);
    std::vector<std::size_t> queue(n);
    std::iota(queue.begin(), queue.end(), std::size_t{0});
    std::size_t head = 0;
    while (head < queue.size()) {
      if (best.bids >= max_bids) return best;
      const std::size_t i = queue[head++];
      // Best and second-best net value -cost - price.
      double v1 = -std::numeric_limits<double>::infinity(), v2 = v1;
      std::size_t j1 = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double val = -cost[i * n + j] - price[j];
        if (val > v1) {
          v2 = v1;
          v1 = val;
          j1 = j;
        } else if (val > v2) {
          v2 = val;
        }
      }
      price[j1] += (v1 - v2) + eps;
      ++best.bids;
      if (owner[j1] != unassigned) {
        assigned[owner[j1]] = unassigned;
        queue.push_back(owner[j1]);
      }
      owner[j1] = i;
      assigned[i] = j1;
    }
    ++best.phases_completed;
    const double c = sum_cost(assigned);
    if (c < best.cost) {
      best.cost = c;
      best.assignment = assigned;
    }
    if (eps <= epsilon) break;
    eps = std::max(eps / 4.0, epsilon);
  }
  return best;
}

inline constexpr std::size_t kDefaultAuctionBids = 1'000'000;
inline constexpr double kDefaultAuctionEpsilon = 1e-3;

/// Approximate EMD via the auction algorithm; usable well beyond the exact cap.
template <std::size_t D>
double emd_approx(const PointCloud<D>& P, const PointCloud<D>& G, std::size_t iterations = kDefaultAuctionBids,
                  double epsilon = kDefaultAuctionEpsilon, EmdReduction reduction = EmdReduction::Mean) {
  const auto r = auction_assignment(P, G, iterations, epsilon);
  return reduction == EmdReduction::Sum ? r.cost : r.cost / static_cast<double>(P.size());
}

}  // namespace fcd

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/metrics.hpp"
#include "fcd/point_cloud.hpp"

namespace fcd {

/// (alpha, beta): weight on the local-fitting term and on the
/// global-coverage term. alpha == beta is plain Chamfer distance.
struct FcdWeights {
  double alpha = 1.0;
  double beta = 1.0;

  FcdWeights() = default;
  FcdWeights(double a, double b) : alpha(a), beta(b) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
      throw InvalidInput("FCD weights must be finite and positive");
  }

  friend bool operator==(const FcdWeights&, const FcdWeights&) = default;
};

/// One gradient vector per predicted point.
template <std::size_t D>
struct GradientField {
  std::vector<Point<D>> vectors;

  std::size_t size() const { return vectors.size(); }
  const Point<D>& operator[](std::size_t i) const { return vectors[i]; }

  double max_norm() const {
    double m = 0.0;
    for (const auto& v : vectors) m = std::max(m, norm(v));
    return m;
  }

  GradientField& operator+=(const GradientField& o) {
    for (std::size_t i = 0; i < vectors.size(); ++i) vectors[i] += o.vectors[i];
    return *this;
  }
};

inline double fcd(const ChamferTerms& t, const FcdWeights& w) { return w.alpha * t.local + w.beta * t.global; }

/// alpha * cd_local + beta * cd_global.
template <std::size_t D>
double fcd(const PointCloud<D>& P, const PointCloud<D>& G, const FcdWeights& w, DistanceOrder r) {
  return fcd(chamfer_terms(P, G, r), w);
}

/// d d^r(p, g) / d p. Zero when p == g for the first order (0 lies in the
/// subdifferential of the norm there).
template <std::size_t D>
Point<D> distance_gradient(const Point<D>& p, const Point<D>& g, double dist, DistanceOrder r) {
  if (r == DistanceOrder::Second) return 2.0 * (p - g);
  Point<D> d = p - g;
  if (dist == 0.0) return Point<D>{};
  for (auto& v : d) v /= dist;
  return d;
}

/// Gradient of fcd with respect to the predicted coordinates, holding the
/// current nearest-neighbour assignment fixed.
template <std::size_t D>
GradientField<D> fcd_gradient(const PointCloud<D>& P, const PointCloud<D>& G, const Correspondence& c,
                              const FcdWeights& w, DistanceOrder r) {
  GradientField<D> grad{std::vector<Point<D>>(P.size())};
  const double local_scale = w.alpha / static_cast<double>(P.size());
  const double global_scale = w.beta / static_cast<double>(G.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const auto& m = c.forward[i];
    grad.vectors[i] = local_scale * distance_gradient(P[i], G[m.index], m.distance, r);
  }
  // Each reference point pulls on whichever prediction is its nearest.
  for (std::size_t j = 0; j < G.size(); ++j) {
    const auto& m = c.backward[j];
    grad.vectors[m.index] += global_scale * distance_gradient(P[m.index], G[j], m.distance, r);
  }
  return grad;
}

template <std::size_t D>
GradientField<D> fcd_gradient(const PointCloud<D>& P, const PointCloud<D>& G, const FcdWeights& w,
                              DistanceOrder r) {
  return fcd_gradient(P, G, correspond(P, G), w, r);
}

/// Gradient of the density-aware Chamfer distance used as a loss.
/// Hit counts and assignments are treated as constants.
template <std::size_t D>
GradientField<D> dcd_gradient(const PointCloud<D>& P, const PointCloud<D>& G, const Correspondence& c,
                              double temperature) {
  if (!(temperature > 0.0)) throw InvalidInput("dcd temperature must be positive");
  const auto g_hits = hit_counts(c.forward, G.size());
  const auto p_hits = hit_counts(c.backward, P.size());
  GradientField<D> grad{std::vector<Point<D>>(P.size())};
  const double fwd = 0.5 * temperature / static_cast<double>(P.size());
  const double bwd = 0.5 * temperature / static_cast<double>(G.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const auto& m = c.forward[i];
    const double k = fwd * std::exp(-temperature * m.distance) / static_cast<double>(g_hits[m.index]);
    grad.vectors[i] = k * distance_gradient(P[i], G[m.index], m.distance, DistanceOrder::First);
  }
  for (std::size_t j = 0; j < G.size(); ++j) {
    const auto& m = c.backward[j];
    const double k = bwd * std::exp(-temperature * m.distance) / static_cast<double>(p_hits[m.index]);
    grad.vectors[m.index] += k * distance_gradient(P[m.index], G[j], m.distance, DistanceOrder::First);
  }
  return grad;
}

}  // namespace fcd

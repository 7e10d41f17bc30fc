#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/format.hpp"
#include "fcd/metrics.hpp"
#include "fcd/objective.hpp"

namespace fcd {

/// Two reference points g1, g2 and a prediction {p1, p2} where p1 is already
/// matched to g1 and p2 sits between g1 and g2 on the x axis.
struct StalemateSetup {
  Point<2> g1{0.0, 0.0};
  Point<2> g2{4.0, 0.0};
  Point<2> p1{0.5, 0.0};
  FcdWeights weights{1.0, 2.0};

  PointCloud<2> reference() const { return {g1, g2}; }
  PointCloud<2> prediction(const Point<2>& p2) const { return {p1, p2}; }
};

struct StalemateGradients {
  Point<2> cd_l1, fcd_l1, cd_l2, fcd_l2;
};

namespace detail {

inline void check_stalemate_config(const Point<2>& p2, const StalemateSetup& s) {
  const double to_g1 = distance(p2, s.g1), to_g2 = distance(p2, s.g2);
  if (!(to_g1 > distance(s.p1, s.g1)))
    throw InvalidInput("p2 must be farther from g1 than p1 is");
  if (!(distance(s.g2, p2) < distance(s.g2, s.p1)))
    throw InvalidInput("p2 must be g2's nearest predicted point");
  if (to_g1 == to_g2)
    throw NumericalError("p2 is equidistant from g1 and g2; its nearest-neighbour assignment is ambiguous");
}

inline Point<2> unit(const Point<2>& from, const Point<2>& to) {
  const double d = distance(from, to);
  return {(from[0] - to[0]) / d, (from[1] - to[1]) / d};
}

}  // namespace detail

/// Analytic gradients at p2 of CD (alpha = beta = 1) and of FCD with the
/// setup's weights, for both distance orders. Before the midpoint p2's local
/// match is g1 and the two terms oppose each other; past it both pull to g2.
inline StalemateGradients closed_form_gradients(const Point<2>& p2, const StalemateSetup& s) {
  detail::check_stalemate_config(p2, s);
  const bool before_midpoint = distance(p2, s.g1) < distance(p2, s.g2);
  const double a = s.weights.alpha, b = s.weights.beta;
  StalemateGradients out;
  if (before_midpoint) {
    const auto u1 = detail::unit(p2, s.g1), u2 = detail::unit(p2, s.g2);
    out.cd_l1 = {0.5 * u1[0] + 0.5 * u2[0], 0.5 * u1[1] + 0.5 * u2[1]};
    out.fcd_l1 = {0.5 * a * u1[0] + 0.5 * b * u2[0], 0.5 * a * u1[1] + 0.5 * b * u2[1]};
    // 2p2 - (g1 + g2) and alpha(p2 - g1) + beta(p2 - g2)
    out.cd_l2 = {2.0 * p2[0] - (s.g1[0] + s.g2[0]), 2.0 * p2[1] - (s.g1[1] + s.g2[1])};
    out.fcd_l2 = {(a + b) * p2[0] - (a * s.g1[0] + b * s.g2[0]), (a + b) * p2[1] - (a * s.g1[1] + b * s.g2[1])};
  } else {
    const auto u2 = detail::unit(p2, s.g2);
    const double h = 0.5 * (a + b);
    out.cd_l1 = u2;
    out.fcd_l1 = {h * u2[0], h * u2[1]};
    out.cd_l2 = {2.0 * (p2[0] - s.g2[0]), 2.0 * (p2[1] - s.g2[1])};
    out.fcd_l2 = {(a + b) * (p2[0] - s.g2[0]), (a + b) * (p2[1] - s.g2[1])};
  }
  return out;
}

/// Objective values on the 2 x 2 clouds written out by hand (no
/// nearest-neighbour search). CD here is the unhalved local + global sum.
struct StalemateValues {
  double cd_l1, fcd_l1, cd_l2, fcd_l2;
};

inline StalemateValues closed_form_values(const Point<2>& p2, const StalemateSetup& s) {
  detail::check_stalemate_config(p2, s);
  const bool before_midpoint = distance(p2, s.g1) < distance(p2, s.g2);
  const Point<2>& p2_match = before_midpoint ? s.g1 : s.g2;
  auto terms = [&](DistanceOrder r) {
    auto d = [r](const Point<2>& x, const Point<2>& y) {
      return r == DistanceOrder::First ? distance(x, y) : squared_distance(x, y);
    };
    return ChamferTerms{(d(s.p1, s.g1) + d(p2, p2_match)) / 2.0, (d(s.g1, s.p1) + d(s.g2, p2)) / 2.0};
  };
  const auto t1 = terms(DistanceOrder::First), t2 = terms(DistanceOrder::Second);
  const FcdWeights cd{1.0, 1.0};
  return {fcd(t1, cd), fcd(t1, s.weights), fcd(t2, cd), fcd(t2, s.weights)};
}

struct SweepConfig {
  StalemateSetup setup;
  std::vector<double> xs;  ///< p2 = (x, 0)

  /// x = 0.6, 0.7, ..., 3.4 without the midpoint 2.0.
  static SweepConfig defaults() { return range(0.6, 3.4, 0.1); }

  static SweepConfig range(double from, double to, double step, const StalemateSetup& setup = {}) {
    if (!(step > 0.0) || !(to >= from)) throw InvalidInput("sweep range needs step > 0 and to >= from");
    SweepConfig c;
    c.setup = setup;
    const double mid = 0.5 * (setup.g1[0] + setup.g2[0]);
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long k = 0; k <= n; ++k) {
      // snapped to a 1e-9 grid so decimal steps stay exact decimals
      const double x = std::round((from + static_cast<double>(k) * step) * 1e9) / 1e9;
      if (std::abs(x - mid) > 1e-12) c.xs.push_back(x);
    }
    return c;
  }
};

struct SweepRow {
  double x = 0.0;
  StalemateValues values{};
  StalemateGradients gradients{};  ///< from fcd_gradient on the full clouds
  double closed_form_deviation = 0.0;  ///< max |metric route - closed form| over values and gradients
};

/// Evaluates CD / FCD values (metric route) and gradients at p2 (fcd_gradient
/// route) for each x, recording how far they stray from the closed forms.
inline std::vector<SweepRow> sweep(const SweepConfig& config) {
  const auto& s = config.setup;
  if (config.xs.empty()) throw InvalidInput("sweep needs at least one abscissa");
  for (std::size_t i = 1; i < config.xs.size(); ++i)
    if (!(config.xs[i] > config.xs[i - 1])) throw InvalidInput("sweep abscissae must be strictly increasing");
  const auto G = s.reference();
  const FcdWeights cd{1.0, 1.0};
  std::vector<SweepRow> rows;
  for (double x : config.xs) {
    const Point<2> p2{x, 0.0};
    try {
      detail::check_stalemate_config(p2, s);
    } catch (const NumericalError& e) {
      throw InvalidInput("sweep abscissa " + format_double(x) + ": " + e.what());
    }
    const auto P = s.prediction(p2);
    SweepRow row;
    row.x = x;
    const auto t1 = ChamferTerms{cd_local(P, G, DistanceOrder::First), cd_global(P, G, DistanceOrder::First)};
    const auto t2 = ChamferTerms{cd_local(P, G, DistanceOrder::Second), cd_global(P, G, DistanceOrder::Second)};
    row.values = {fcd(t1, cd), fcd(t1, s.weights), fcd(t2, cd), fcd(t2, s.weights)};
    row.gradients = {fcd_gradient(P, G, cd, DistanceOrder::First)[1],
                     fcd_gradient(P, G, s.weights, DistanceOrder::First)[1],
                     fcd_gradient(P, G, cd, DistanceOrder::Second)[1],
                     fcd_gradient(P, G, s.weights, DistanceOrder::Second)[1]};

    const auto cv = closed_form_values(p2, s);
    const auto cg = closed_form_gradients(p2, s);
    double dev = std::max({std::abs(cv.cd_l1 - row.values.cd_l1), std::abs(cv.fcd_l1 - row.values.fcd_l1),
                           std::abs(cv.cd_l2 - row.values.cd_l2), std::abs(cv.fcd_l2 - row.values.fcd_l2)});
    for (auto [a, b] : {std::pair{cg.cd_l1, row.gradients.cd_l1}, std::pair{cg.fcd_l1, row.gradients.fcd_l1},
                        std::pair{cg.cd_l2, row.gradients.cd_l2}, std::pair{cg.fcd_l2, row.gradients.fcd_l2}})
      dev = std::max({dev, std::abs(a[0] - b[0]), std::abs(a[1] - b[1])});
    row.closed_form_deviation = dev;
    rows.push_back(row);
  }
  return rows;
}

inline std::string sweep_csv(const SweepConfig& config, const std::vector<SweepRow>& rows) {
  const auto& s = config.setup;
  auto pt = [](const Point<2>& p) { return "(" + format_double(p[0]) + " " + format_double(p[1]) + ")"; };
  std::ostringstream out;
  out << "# g1=" << pt(s.g1) << " g2=" << pt(s.g2) << " p1=" << pt(s.p1) << " alpha=" << format_double(s.weights.alpha)
      << " beta=" << format_double(s.weights.beta)
      << "; p2=(x 0); p1 location and sweep range are chosen defaults; cd columns are local+global (unhalved)\n";
  out << "x,cd_l1,fcd_l1,cd_l2,fcd_l2,grad_cd_l1_x,grad_fcd_l1_x,grad_cd_l2_x,grad_fcd_l2_x\n";
  for (const auto& r : rows)
    out << format_double(r.x) << ',' << format_double(r.values.cd_l1) << ',' << format_double(r.values.fcd_l1) << ','
        << format_double(r.values.cd_l2) << ',' << format_double(r.values.fcd_l2) << ','
        << format_double(r.gradients.cd_l1[0]) << ',' << format_double(r.gradients.fcd_l1[0]) << ','
        << format_double(r.gradients.cd_l2[0]) << ',' << format_double(r.gradients.fcd_l2[0]) << '\n';
  return out.str();
}

struct AmbiguityOptions {
  double spacing = 1e-3;          ///< grid pitch; 1 / temperature puts DCD in its sensitive range
  double uniform_jitter = 0.5;    ///< uniform cloud offsets, in [-j, j] * spacing per axis
  double temperature = kDefaultDcdTemperature;
  double match_tolerance = 1e-3;  ///< bisection stops at this relative CD mismatch
  int max_iterations = 200;
};

struct AmbiguityReport {
  double cd_clustered = 0.0, cd_uniform = 0.0;
  double dcd_clustered = 0.0, dcd_uniform = 0.0;
  double cluster_scale = 0.0;  ///< jitter radius found by bisection
  int iterations = 0;
};

struct AmbiguityPair {
  PointCloud<2> clustered;
  PointCloud<2> uniform;
  PointCloud<2> reference;
  AmbiguityReport report;
};

namespace detail {

/// rows x cols with cols even and as close to square as possible.
inline std::pair<std::size_t, std::size_t> grid_shape(std::size_t n) {
  std::size_t best_cols = n;
  for (std::size_t cols = 2; cols <= n; cols += 2)
    if (n % cols == 0 && cols * cols >= n) {
      best_cols = cols;
      break;
    }
  return {n / best_cols, best_cols};
}

}  // namespace detail

/// Builds two predictions with (nearly) the same Euclidean Chamfer distance to
/// a uniform grid G: one uniformly jittered, one where pairs of points
/// cluster on half of the grid (checkerboard) and leave the rest uncovered.
/// The cluster radius is bisected until the CD values agree.
inline AmbiguityPair build_ambiguity_pair(std::size_t n, std::uint64_t seed, const AmbiguityOptions& opt = {}) {
  if (n < 8 || n % 2 != 0) throw InvalidInput("ambiguity pair needs an even n >= 8");
  if (!(opt.spacing > 0.0)) throw InvalidInput("grid spacing must be positive");
  const auto [rows, cols] = detail::grid_shape(n);
  const double h = opt.spacing;

  std::vector<Point<2>> grid, anchors;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      grid.push_back({static_cast<double>(j) * h, static_cast<double>(i) * h});
      if ((i + j) % 2 == 0) anchors.push_back(grid.back());
    }
  AmbiguityPair out;
  out.reference = PointCloud<2>(grid);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point<2>> uniform(n);
  for (std::size_t i = 0; i < n; ++i) uniform[i] = {grid[i][0] + opt.uniform_jitter * h * u(rng),
                                                    grid[i][1] + opt.uniform_jitter * h * u(rng)};
  out.uniform = PointCloud<2>(uniform);

  std::vector<Point<2>> dirs(n);
  for (auto& d : dirs) d = {u(rng), u(rng)};
  auto clustered = [&](double scale) {
    std::vector<Point<2>> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = anchors[i / 2] + scale * dirs[i];
    return PointCloud<2>(std::move(pts));
  };

  const double target = chamfer_l1(out.uniform, out.reference);
  auto mismatch = [&](double scale) { return chamfer_l1(clustered(scale), out.reference) - target; };
  double lo = 0.0, hi = h;
  int it = 0;
  if (mismatch(lo) > 0.0) throw NumericalError("clustered cloud already exceeds the uniform CD at zero radius");
  while (mismatch(hi) < 0.0 && it < opt.max_iterations) {
    lo = hi;
    hi *= 2.0;
    ++it;
  }
  double mid = hi;
  for (; it < opt.max_iterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = mismatch(mid);
    if (std::abs(f) <= opt.match_tolerance * target) break;
    (f < 0.0 ? lo : hi) = mid;
  }
  if (it >= opt.max_iterations)
    throw NumericalError("bisection did not match CD within " + std::to_string(opt.max_iterations) + " iterations");

  out.clustered = clustered(mid);
  out.report.cluster_scale = mid;
  out.report.iterations = it + 1;
  out.report.cd_clustered = chamfer_l1(out.clustered, out.reference);
  out.report.cd_uniform = target;
  out.report.dcd_clustered = dcd(out.clustered, out.reference, opt.temperature);
  out.report.dcd_uniform = dcd(out.uniform, out.reference, opt.temperature);
  return out;
}

}  // namespace fcd

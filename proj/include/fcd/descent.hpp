#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fcd/emd.hpp"
#include "fcd/errors.hpp"
#include "fcd/format.hpp"
#include "fcd/metrics.hpp"
#include "fcd/multi_stage.hpp"
#include "fcd/objective.hpp"
#include "fcd/sampling.hpp"
#include "fcd/schedule.hpp"

namespace fcd {

enum class UpdateRule { Plain, Momentum };

inline UpdateRule parse_update_rule(std::string_view s) {
  if (s == "plain") return UpdateRule::Plain;
  if (s == "momentum") return UpdateRule::Momentum;
  throw InvalidInput("unknown update rule '" + std::string(s) + "'");
}

struct OptimizerConfig {
  int steps = 1000;
  double step_size = 0.05;
  UpdateRule update_rule = UpdateRule::Plain;
  double momentum_coeff = 0.9;
  std::uint64_t seed = 42;
  int record_every = 10;
  bool snapshots = true;               ///< compute cd_l1 / dcd / emd per recorded row
  std::size_t snapshot_points = 256;   ///< EMD snapshot size cap
  double snapshot_temperature = kDefaultDcdTemperature;

  void validate() const {
    if (steps < 1) throw InvalidInput("optimizer needs at least one step");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) throw InvalidInput("step size must be positive");
    if (!(momentum_coeff >= 0.0 && momentum_coeff < 1.0)) throw InvalidInput("momentum must lie in [0, 1)");
    if (record_every < 1) throw InvalidInput("record_every must be >= 1");
    if (snapshot_points < 1) throw InvalidInput("snapshot_points must be >= 1");
  }
};

enum class ObjectiveKind { CdL1, CdL2, Fcd, DcdLoss };

inline ObjectiveKind parse_objective_kind(std::string_view s) {
  if (s == "cd-l1") return ObjectiveKind::CdL1;
  if (s == "cd-l2") return ObjectiveKind::CdL2;
  if (s == "fcd") return ObjectiveKind::Fcd;
  if (s == "dcd-loss") return ObjectiveKind::DcdLoss;
  throw InvalidInput("unknown objective '" + std::string(s) + "'");
}

/// What the descent minimises. cd-l1 is the halved Euclidean Chamfer
/// distance, cd-l2 the squared one; fcd uses `weights` (or the schedule
/// passed to optimize) at distance order `order`.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::Fcd;
  FcdWeights weights{1.0, 2.0};
  DistanceOrder order = DistanceOrder::First;
  double dcd_temperature = kDefaultDcdTemperature;

  static ObjectiveSpec cd_l1() { return {ObjectiveKind::CdL1, {0.5, 0.5}, DistanceOrder::First}; }
  static ObjectiveSpec cd_l2() { return {ObjectiveKind::CdL2, {1.0, 1.0}, DistanceOrder::Second}; }
  static ObjectiveSpec fcd(FcdWeights w, DistanceOrder r) { return {ObjectiveKind::Fcd, w, r}; }
  static ObjectiveSpec dcd_loss(double temperature) {
    return {ObjectiveKind::DcdLoss, {0.5, 0.5}, DistanceOrder::First, temperature};
  }
};

struct TraceRow {
  int epoch = 0;
  double objective = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> cd_l1, dcd, emd;
  double grad_max = 0.0;
  bool assignment_changed = false;  ///< any nearest-neighbour match differs from the previous step
};

struct OptimizationTrace {
  std::vector<TraceRow> rows;

  static constexpr std::string_view csv_header = "epoch,objective,alpha,beta,cd_l1,dcd,emd,grad_max";

  std::string to_csv() const {
    std::ostringstream out;
    out << csv_header << '\n';
    for (const auto& r : rows)
      out << r.epoch << ',' << format_double(r.objective) << ',' << format_double(r.alpha) << ','
          << format_double(r.beta) << ',' << format_optional(r.cd_l1) << ',' << format_optional(r.dcd) << ','
          << format_optional(r.emd) << ',' << format_double(r.grad_max) << '\n';
    return out.str();
  }
};

template <std::size_t D>
struct OptimizationResult {
  PointCloud<D> final;
  OptimizationTrace trace;
  std::optional<UncertaintyState> state;
};

namespace detail {

/// Schedule epoch for optimizer step `step` of `steps`: the run is stretched
/// over the schedule's [0, T] range.
inline int schedule_epoch(const ScheduleSpec& s, int step, int steps) {
  return static_cast<int>(static_cast<long long>(step) * s.T / steps);
}

inline bool same_matching(const Correspondence& a, const Correspondence& b) {
  auto eq = [](const std::vector<Neighbor>& x, const std::vector<Neighbor>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].index != y[i].index) return false;
    return true;
  };
  return eq(a.forward, b.forward) && eq(a.backward, b.backward);
}

/// Fine-stage weighting: either a fixed pair, a preset schedule, or learned
/// uncertainty state descended alongside the points.
class FineWeighting {
 public:
  FineWeighting(FcdWeights fixed, const std::optional<ScheduleSpec>& schedule) : fixed_(fixed), schedule_(schedule) {
    if (schedule_) {
      schedule_->validate();
      if (schedule_->kind == ScheduleKind::Uncertainty) state_ = UncertaintyState::from_spec(*schedule_);
    }
  }

  FcdWeights weights(int step, int steps) const {
    if (!schedule_) return fixed_;
    return schedule_weights(*schedule_, schedule_epoch(*schedule_, step, steps), state_);
  }

  /// Objective contribution of the fine terms at the current weights.
  double value(const ChamferTerms& t, const FcdWeights& w) const {
    if (state_) return uncertainty_loss(t.local, t.global, *state_).total;
    return fcd(t, w);
  }

  void step_state(const ChamferTerms& t, double step_size) {
    if (!state_) return;
    const auto u = uncertainty_loss(t.local, t.global, *state_);
    state_->s_local -= step_size * u.d_s_local;
    state_->s_global -= step_size * u.d_s_global;
  }

  const std::optional<UncertaintyState>& state() const { return state_; }

 private:
  FcdWeights fixed_;
  std::optional<ScheduleSpec> schedule_;
  std::optional<UncertaintyState> state_;
};

class DivergenceGuard {
 public:
  void check(double objective, int step) {
    if (!std::isfinite(objective))
      throw NumericalError("objective became non-finite at step " + std::to_string(step));
    if (!initial_) {
      initial_ = std::abs(objective);
      return;
    }
    if (*initial_ > 0.0 && objective > 1e6 * *initial_)
      throw NumericalError("objective diverged at step " + std::to_string(step) + ": " + format_double(objective) +
                           " exceeds 1e6 x initial " + format_double(*initial_));
  }

 private:
  std::optional<double> initial_;
};

template <std::size_t D>
class Snapshotter {
 public:
  Snapshotter(const PointCloud<D>& target, const OptimizerConfig& cfg, std::size_t pred_size) : cfg_(cfg) {
    emd_size_ = std::min({pred_size, target.size(), cfg.snapshot_points, kExactEmdMaxPoints});
    target_sample_ = emd_size_ == target.size() ? target : subsample(target, emd_size_, SampleMethod::Random, cfg.seed);
  }

  void fill(TraceRow& row, const PointCloud<D>& pred, const PointCloud<D>& target) const {
    if (!cfg_.snapshots) return;
    const auto c = correspond(pred, target);
    const auto t = chamfer_terms(c, DistanceOrder::First);
    row.cd_l1 = 0.5 * (t.local + t.global);
    row.dcd = dcd(c, pred.size(), target.size(), cfg_.snapshot_temperature);
    const auto pred_sample =
        emd_size_ == pred.size() ? pred : subsample(pred, emd_size_, SampleMethod::Random, cfg_.seed + 1);
    row.emd = emd_exact(pred_sample, target_sample_);
  }

 private:
  const OptimizerConfig& cfg_;
  std::size_t emd_size_;
  PointCloud<D> target_sample_;
};

template <std::size_t D>
void apply_update(std::span<Point<D>> x, const GradientField<D>& g, std::vector<Point<D>>& velocity,
                  const std::vector<char>& pinned, const OptimizerConfig& cfg) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!pinned.empty() && pinned[i]) continue;
    Point<D> dir = g[i];
    if (cfg.update_rule == UpdateRule::Momentum) {
      velocity[i] = cfg.momentum_coeff * velocity[i] + dir;
      dir = velocity[i];
    }
    for (std::size_t k = 0; k < D; ++k) x[i][k] -= cfg.step_size * dir[k];
  }
}

}  // namespace detail

/// Marks points that must not move. Indices must be in range.
template <std::size_t D>
std::vector<char> support_pinning(const PointCloud<D>& cloud, const std::vector<std::size_t>& pinned) {
  std::vector<char> mask(cloud.size(), 0);
  for (auto i : pinned) {
    if (i >= cloud.size())
      throw InvalidInput("pinned index " + std::to_string(i) + " out of range for " + std::to_string(cloud.size()) +
                         " points");
    mask[i] = 1;
  }
  return mask;
}

/// Gradient descent on the coordinates of `init` towards `target`.
///
/// Nearest-neighbour assignments are recomputed at every step. With a
/// schedule, the run's steps are mapped linearly onto the schedule's epochs
/// [0, T]; an uncertainty schedule also descends its log-variance state. Rows
/// are recorded every `record_every` steps (objective and gradient before
/// the update) plus a final row after the last update.
template <std::size_t D>
OptimizationResult<D> optimize(const PointCloud<D>& init, const PointCloud<D>& target, const ObjectiveSpec& objective,
                               const std::optional<ScheduleSpec>& schedule, const OptimizerConfig& config,
                               const std::vector<std::size_t>& pinned = {}) {
  config.validate();
  detail::require_non_empty(init, "initial");
  detail::require_non_empty(target, "target");
  const auto pin_mask = support_pinning(init, pinned);

  const bool scheduled = objective.kind == ObjectiveKind::Fcd && schedule.has_value();
  detail::FineWeighting weighting(objective.weights, scheduled ? schedule : std::nullopt);
  const DistanceOrder r = objective.kind == ObjectiveKind::CdL1   ? DistanceOrder::First
                          : objective.kind == ObjectiveKind::CdL2 ? DistanceOrder::Second
                                                                  : objective.order;

  OptimizationResult<D> result{init, {}, std::nullopt};
  auto& x = result.final;
  std::vector<Point<D>> velocity(x.size());
  detail::DivergenceGuard guard;
  const detail::Snapshotter<D> snap(target, config, x.size());
  std::optional<Correspondence> previous;

  auto evaluate = [&](int step, TraceRow& row, bool advance_state) {
    auto c = correspond(x, target);
    GradientField<D> g;
    if (objective.kind == ObjectiveKind::DcdLoss) {
      row.objective = dcd(c, x.size(), target.size(), objective.dcd_temperature);
      row.alpha = objective.weights.alpha;
      row.beta = objective.weights.beta;
      g = dcd_gradient(x, target, c, objective.dcd_temperature);
    } else {
      const auto w = weighting.weights(step, config.steps);
      const auto terms = chamfer_terms(c, r);
      row.objective = weighting.value(terms, w);
      row.alpha = w.alpha;
      row.beta = w.beta;
      g = fcd_gradient(x, target, c, w, r);
      if (advance_state) weighting.step_state(terms, config.step_size);
    }
    row.epoch = step;
    row.grad_max = g.max_norm();
    row.assignment_changed = previous && !detail::same_matching(*previous, c);
    previous = std::move(c);
    guard.check(row.objective, step);
    return g;
  };

  for (int step = 0; step < config.steps; ++step) {
    TraceRow row;
    const auto g = evaluate(step, row, true);
    if (step % config.record_every == 0) {
      snap.fill(row, x, target);
      result.trace.rows.push_back(row);
    }
    detail::apply_update(x.mutable_points(), g, velocity, pin_mask, config);
    if (!x.all_finite()) throw NumericalError("coordinates became non-finite at step " + std::to_string(step));
  }
  TraceRow last;
  evaluate(config.steps, last, false);
  snap.fill(last, x, target);
  result.trace.rows.push_back(last);
  result.state = weighting.state();
  return result;
}

/// Parametric coarse-to-fine generator: each coarse point spawns
/// `children_per_coarse` fine points at coarse + offset, offsets free.
struct HierarchySpec {
  std::size_t coarse_count = 16;
  std::size_t children_per_coarse = 4;
  double offset_scale = 1e-2;   ///< offsets start uniform in [-scale, scale]
  bool freeze_offsets = false;  ///< offsets fixed at zero

  std::size_t fine_count() const { return coarse_count * children_per_coarse; }
};

template <std::size_t D>
struct HierarchicalResult {
  PointCloud<D> fine;
  PointCloud<D> coarse;
  OptimizationTrace trace;
  std::optional<UncertaintyState> state;
};

template <std::size_t D>
PointCloud<D> expand_hierarchy(const PointCloud<D>& coarse, const std::vector<Point<D>>& offsets, std::size_t m) {
  std::vector<Point<D>> fine(offsets.size());
  for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = coarse[i / m] + offsets[i];
  return PointCloud<D>(std::move(fine));
}

template <std::size_t D>
std::vector<Point<D>> initial_offsets(const HierarchySpec& h, std::uint64_t seed) {
  std::vector<Point<D>> offsets(h.fine_count());
  if (h.freeze_offsets || h.offset_scale == 0.0) return offsets;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-h.offset_scale, h.offset_scale);
  for (auto& o : offsets)
    for (auto& v : o) v = u(rng);
  return offsets;
}

/// Jointly descends coarse coordinates and child offsets on the two-stage
/// loss: FCD(coarse, farthest-point subsample of target; tau, theta) +
/// FCD(fine, target; schedule). Trace metrics refer to the fine cloud.
template <std::size_t D>
HierarchicalResult<D> optimize_hierarchical(const PointCloud<D>& init_coarse, const HierarchySpec& hierarchy,
                                            const PointCloud<D>& target, const ScheduleSpec& schedule,
                                            const OptimizerConfig& config,
                                            DistanceOrder r = DistanceOrder::First) {
  config.validate();
  schedule.validate();
  detail::require_non_empty(target, "target");
  const std::size_t m = hierarchy.children_per_coarse;
  if (hierarchy.coarse_count < 1 || m < 1) throw InvalidInput("hierarchy needs coarse_count, children >= 1");
  if (init_coarse.size() != hierarchy.coarse_count)
    throw InvalidInput("initial coarse cloud has " + std::to_string(init_coarse.size()) + " points, hierarchy expects " +
                       std::to_string(hierarchy.coarse_count));
  const auto coarse_target = subsample(target, hierarchy.coarse_count, SampleMethod::FarthestPoint, config.seed);

  HierarchicalResult<D> result{{}, init_coarse, {}, std::nullopt};
  auto offsets = initial_offsets<D>(hierarchy, config.seed);
  std::vector<Point<D>> v_coarse(init_coarse.size()), v_offsets(offsets.size());
  detail::FineWeighting weighting({schedule.tau, schedule.theta}, schedule);
  const FcdWeights coarse_w{schedule.tau, schedule.theta};
  detail::DivergenceGuard guard;
  const detail::Snapshotter<D> snap(target, config, hierarchy.fine_count());
  const std::vector<char> no_pins;

  auto evaluate = [&](int step, TraceRow& row, GradientField<D>& g_coarse, GradientField<D>& g_fine,
                      bool advance_state) {
    const auto fine = expand_hierarchy(result.coarse, offsets, m);
    const auto cc = correspond(result.coarse, coarse_target);
    const auto cf = correspond(fine, target);
    const auto w = weighting.weights(step, config.steps);
    const auto fine_terms = chamfer_terms(cf, r);
    row.objective = fcd(chamfer_terms(cc, r), coarse_w) + weighting.value(fine_terms, w);
    row.alpha = w.alpha;
    row.beta = w.beta;
    row.epoch = step;
    g_coarse = fcd_gradient(result.coarse, coarse_target, cc, coarse_w, r);
    g_fine = fcd_gradient(fine, target, cf, w, r);
    for (std::size_t i = 0; i < g_fine.size(); ++i) g_coarse.vectors[i / m] += g_fine[i];
    row.grad_max = std::max(g_coarse.max_norm(), hierarchy.freeze_offsets ? 0.0 : g_fine.max_norm());
    if (advance_state) weighting.step_state(fine_terms, config.step_size);
    guard.check(row.objective, step);
    return fine;
  };

  for (int step = 0; step < config.steps; ++step) {
    TraceRow row;
    GradientField<D> g_coarse, g_fine;
    const auto fine = evaluate(step, row, g_coarse, g_fine, true);
    if (step % config.record_every == 0) {
      snap.fill(row, fine, target);
      result.trace.rows.push_back(row);
    }
    detail::apply_update(result.coarse.mutable_points(), g_coarse, v_coarse, no_pins, config);
    if (!hierarchy.freeze_offsets) detail::apply_update(std::span<Point<D>>(offsets), g_fine, v_offsets, no_pins, config);
    if (!result.coarse.all_finite()) throw NumericalError("coordinates became non-finite at step " + std::to_string(step));
  }
  TraceRow last;
  GradientField<D> g_coarse, g_fine;
  result.fine = evaluate(config.steps, last, g_coarse, g_fine, false);
  snap.fill(last, result.fine, target);
  result.trace.rows.push_back(last);
  result.state = weighting.state();
  return result;
}

/// 8 x 8 planar unit grid (z = 0) as target; 64 initial points drawn from an
/// isotropic Gaussian (sigma 0.05) around the grid corner at the origin.
struct ClusteredGridBenchmark {
  PointCloud<3> init;
  PointCloud<3> target;
};

inline PointCloud<3> planar_grid(std::size_t side) {
  std::vector<Point<3>> pts;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j)
      pts.push_back({static_cast<double>(j) / static_cast<double>(side - 1),
                     static_cast<double>(i) / static_cast<double>(side - 1), 0.0});
  return PointCloud<3>(std::move(pts));
}

inline ClusteredGridBenchmark make_clustered_grid_benchmark(std::uint64_t seed = 42, std::size_t side = 8,
                                                            double sigma = 0.05) {
  ClusteredGridBenchmark b{{}, planar_grid(side)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<Point<3>> pts(side * side);
  for (auto& p : pts)
    for (auto& v : p) v = n(rng);
  b.init = PointCloud<3>(std::move(pts));
  return b;
}

inline OptimizerConfig clustered_grid_config() {
  OptimizerConfig c;
  c.steps = 2000;
  c.step_size = 0.05;
  c.record_every = 20;
  return c;
}

}  // namespace fcd

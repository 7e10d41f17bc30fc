#pragma once

#include <optional>
#include <vector>

#include "fcd/metrics.hpp"
#include "fcd/objective.hpp"
#include "fcd/schedule.hpp"

namespace fcd {

template <std::size_t D>
struct CloudPair {
  PointCloud<D> predicted;
  PointCloud<D> target;
};

/// Coarse-to-fine supervision: K coarse outputs and one fine output, each
/// compared with its target at training epoch `epoch`.
template <std::size_t D>
struct StageLossSpec {
  std::vector<CloudPair<D>> coarse;
  CloudPair<D> fine;
  int epoch = 0;
};

template <std::size_t D>
struct StageEvaluation {
  double total = 0.0;
  double coarse_loss = 0.0;
  double fine_loss = 0.0;
  ChamferTerms fine_terms;
  FcdWeights fine_weights;
  std::vector<GradientField<D>> coarse_gradients;  ///< one per coarse stage
  GradientField<D> fine_gradient;
};

/// Evaluates the summed loss and per-stage gradients. Coarse stages always
/// use the static (tau, theta) weights; the fine stage follows `schedule`.
template <std::size_t D>
StageEvaluation<D> evaluate_stages(const StageLossSpec<D>& spec, const ScheduleSpec& schedule, DistanceOrder r,
                                   const std::optional<UncertaintyState>& state = std::nullopt) {
  schedule.validate();
  StageEvaluation<D> out;
  const FcdWeights coarse_w{schedule.tau, schedule.theta};
  CompensatedSum coarse;
  for (const auto& stage : spec.coarse) {
    const auto c = correspond(stage.predicted, stage.target);
    coarse += fcd(chamfer_terms(c, r), coarse_w);
    out.coarse_gradients.push_back(fcd_gradient(stage.predicted, stage.target, c, coarse_w, r));
  }
  out.coarse_loss = coarse.value();
  out.fine_weights = schedule_weights(schedule, spec.epoch, state);
  const auto c = correspond(spec.fine.predicted, spec.fine.target);
  out.fine_terms = chamfer_terms(c, r);
  out.fine_loss = fcd(out.fine_terms, out.fine_weights);
  out.fine_gradient = fcd_gradient(spec.fine.predicted, spec.fine.target, c, out.fine_weights, r);
  out.total = out.coarse_loss + out.fine_loss;
  return out;
}

/// L_coarse + L_fine. With no coarse stages this is the fine FCD alone.
template <std::size_t D>
double multi_stage_loss(const StageLossSpec<D>& spec, const ScheduleSpec& schedule, DistanceOrder r,
                        const std::optional<UncertaintyState>& state = std::nullopt) {
  return evaluate_stages(spec, schedule, r, state).total;
}

}  // namespace fcd

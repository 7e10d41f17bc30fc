#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fcd/errors.hpp"
#include "fcd/format.hpp"
#include "fcd/objective.hpp"

namespace fcd {

enum class ScheduleKind { Static, Stair, Linear, AbridgedLinear, Exponential, Uncertainty };

inline std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Static: return "static";
    case ScheduleKind::Stair: return "stair";
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::AbridgedLinear: return "abridged-linear";
    case ScheduleKind::Exponential: return "exponential";
    case ScheduleKind::Uncertainty: return "uncertainty";
  }
  return "?";
}

inline ScheduleKind parse_schedule_kind(std::string_view s) {
  for (auto k : {ScheduleKind::Static, ScheduleKind::Stair, ScheduleKind::Linear, ScheduleKind::AbridgedLinear,
                 ScheduleKind::Exponential, ScheduleKind::Uncertainty})
    if (to_string(k) == s) return k;
  throw InvalidInput("unknown schedule kind '" + std::string(s) + "'");
}

/// Epoch-indexed rule for the FCD weights. alpha stays at the lower bound
/// `tau`; beta starts at the upper bound `theta` and (except for `static`)
/// decays towards `tau`.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Static;
  double theta = 2.0;
  double tau = 1.0;
  int t = 200;       ///< transition epoch (stair, abridged-linear)
  int T = 400;       ///< total epochs
  double sigma = 200.0;  ///< exponential decay rate

  void validate() const {
    if (!(tau > 0.0) || !(theta > tau) || !std::isfinite(theta))
      throw InvalidInput("schedule needs theta > tau > 0");
    if (!(0 < t && t < T)) throw InvalidInput("schedule needs 0 < t < T");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("schedule needs sigma > 0");
  }

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Log-variance parameters of the uncertainty-weighted objective. The
/// effective weight of each term is exp(-s).
struct UncertaintyState {
  double s_local = 0.0;
  double s_global = 0.0;

  /// State whose effective weights are (tau, theta).
  static UncertaintyState from_spec(const ScheduleSpec& spec) {
    return {-std::log(spec.tau), -std::log(spec.theta)};
  }

  FcdWeights weights() const { return {std::exp(-s_local), std::exp(-s_global)}; }
};

/// Weights for `epoch` in [0, T]. The uncertainty kind reads them from `state`.
inline FcdWeights schedule_weights(const ScheduleSpec& spec, int epoch,
                                   const std::optional<UncertaintyState>& state = std::nullopt) {
  spec.validate();
  if (epoch < 0 || epoch > spec.T)
    throw InvalidInput("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(spec.T) + "]");
  const double span = spec.theta - spec.tau;
  const double e = static_cast<double>(epoch);
  double beta = spec.theta;
  switch (spec.kind) {
    case ScheduleKind::Static:
      break;
    case ScheduleKind::Stair:
      beta = epoch < spec.t ? spec.theta : spec.tau;
      break;
    case ScheduleKind::Linear:
      beta = spec.theta - (e / spec.T) * span;
      break;
    case ScheduleKind::AbridgedLinear:
      if (epoch > spec.t) beta = spec.theta - ((e - spec.t) / (spec.T - spec.t)) * span;
      break;
    case ScheduleKind::Exponential:
      beta = span * std::exp(-e / spec.sigma) + spec.tau;
      break;
    case ScheduleKind::Uncertainty:
      if (!state) throw InvalidInput("uncertainty schedule needs an UncertaintyState");
      return state->weights();
  }
  return {spec.tau, beta};
}

struct UncertaintyLoss {
  double total = 0.0;
  double d_s_local = 0.0;
  double d_s_global = 0.0;
};

/// exp(-s_l) L_l + exp(-s_g) L_g + s_l + s_g, with its partials in s.
inline UncertaintyLoss uncertainty_loss(double local_loss, double global_loss, const UncertaintyState& state) {
  if (!std::isfinite(state.s_local) || !std::isfinite(state.s_global))
    throw InvalidInput("uncertainty state is not finite");
  if (local_loss < 0.0 || global_loss < 0.0) throw InvalidInput("uncertainty losses must be non-negative");
  const double wl = std::exp(-state.s_local), wg = std::exp(-state.s_global);
  return {wl * local_loss + wg * global_loss + state.s_local + state.s_global, 1.0 - wl * local_loss,
          1.0 - wg * global_loss};
}

inline nlohmann::ordered_json to_json(const ScheduleSpec& s) {
  return {{"kind", std::string(to_string(s.kind))}, {"theta", s.theta}, {"tau", s.tau},
          {"t", s.t},       {"T", s.T},         {"sigma", s.sigma}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ScheduleSpec schedule_from_json(const nlohmann::json& j) {
  ScheduleSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") s.kind = parse_schedule_kind(value.get<std::string>());
    else if (key == "theta") s.theta = value.get<double>();
    else if (key == "tau") s.tau = value.get<double>();
    else if (key == "t") s.t = value.get<int>();
    else if (key == "T") s.T = value.get<int>();
    else if (key == "sigma") s.sigma = value.get<double>();
    else throw InvalidInput("unknown schedule key '" + key + "'");
  }
  s.validate();
  return s;
}

inline std::string to_key_value(const ScheduleSpec& s) {
  std::ostringstream out;
  out << "kind=" << to_string(s.kind) << "\ntheta=" << format_double(s.theta) << "\ntau=" << format_double(s.tau)
      << "\nt=" << s.t << "\nT=" << s.T << "\nsigma=" << format_double(s.sigma) << '\n';
  return out.str();
}

/// Parses `key=value` lines ('#' comments and blank lines allowed).
inline ScheduleSpec schedule_from_key_value(std::string_view text) {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("expected key=value, got '" + line + "'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "kind") {
      j[key] = val;
    } else if (key == "t" || key == "T") {
      std::size_t used = 0;
      j[key] = std::stoi(val, &used);
      if (used != val.size()) throw InvalidInput("bad integer for '" + key + "'");
    } else {
      auto v = parse_double(val);
      if (!v) throw InvalidInput("bad number for '" + key + "'");
      j[key] = *v;
    }
  }
  return schedule_from_json(j);
}

}  // namespace fcd

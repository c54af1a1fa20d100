#include "mcem/critic/trace.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace mcem::critic {

TraceVariant parse_trace_variant(std::string_view name) {
  if (name == "retrace") return TraceVariant::retrace;
  if (name == "tb" || name == "tree_backup") return TraceVariant::tree_backup;
  if (name == "is" || name == "importance_sampling") return TraceVariant::importance_sampling;
  if (name == "sarsa") return TraceVariant::sarsa;
  throw ConfigError("unknown trace variant '" + std::string(name) + "' (expected retrace|tb|is)");
}

std::string to_string(TraceVariant v) {
  switch (v) {
    case TraceVariant::retrace: return "retrace";
    case TraceVariant::tree_backup: return "tb";
    case TraceVariant::importance_sampling: return "is";
    case TraceVariant::sarsa: return "sarsa";
  }
  return "retrace";
}

void TraceSpec::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("trace lambda must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("discount gamma must lie in [0, 1)");
  if (horizon < 1) throw ConfigError("trace horizon n must be >= 1");
}

Scalar trace_coeff(const TraceSpec& spec, Scalar joint_pi_logprob, Scalar joint_beta_logprob, Scalar joint_pi_prob,
                   TraceStats* stats) {
  switch (spec.variant) {
    case TraceVariant::sarsa:
      return spec.lambda;
    case TraceVariant::tree_backup:
      return spec.lambda * std::clamp(joint_pi_prob, 0.0, 1.0);
    case TraceVariant::retrace:
    case TraceVariant::importance_sampling:
      break;
  }
  if (std::isnan(joint_pi_logprob) || std::isnan(joint_beta_logprob) ||
      joint_pi_logprob == std::numeric_limits<Scalar>::infinity()) {
    throw NumericalError("trace_coeff: invalid log-probabilities");
  }
  Scalar log_beta = joint_beta_logprob;
  if (!(log_beta >= kBehaviorLogFloor)) {
    log_beta = kBehaviorLogFloor;
    if (stats) ++stats->clamped;
  }
  const Scalar ratio = std::exp(joint_pi_logprob - log_beta);
  if (spec.variant == TraceVariant::retrace) return spec.lambda * std::min(1.0, ratio);
  return ratio;
}

Scalar retrace_target(std::span<const StepTerms> window, const TraceSpec& spec, TraceStats* stats) {
  if (window.empty()) throw UsageError("retrace_target: empty window");
  const std::size_t len = std::min<std::size_t>(window.size(), static_cast<std::size_t>(spec.horizon));
  Scalar target = window[0].q_taken;
  Scalar weight = 1.0;  // gamma^i * prod_{j=1..i} c_j
  for (std::size_t i = 0; i < len; ++i) {
    const StepTerms& s = window[i];
    if (i > 0) {
      weight *= spec.gamma * trace_coeff(spec, s.joint_logpi, s.joint_logbeta, s.joint_pi_prob, stats);
      if (weight == 0.0) break;
    }
    target += weight * td_delta(s.q_taken, s.reward, s.q_next, s.terminal, spec.gamma);
    if (s.terminal) break;
  }
  return target;
}

std::vector<Scalar> retrace_targets(std::span<const StepTerms> episode, const TraceSpec& spec, TraceStats* stats) {
  std::vector<Scalar> out(episode.size());
  for (std::size_t t = 0; t < episode.size(); ++t) out[t] = retrace_target(episode.subspan(t), spec, stats);
  return out;
}

}  // namespace mcem::critic

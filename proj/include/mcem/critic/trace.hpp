#pragma once

#include "mcem/core.hpp"

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace mcem::critic {

/// Off-policy trace coefficient family.
/// `sarsa` (c_j = lambda) is the uncorrected n-step return used by the on-policy ablation.
enum class TraceVariant { retrace, tree_backup, importance_sampling, sarsa };

TraceVariant parse_trace_variant(std::string_view name);
std::string to_string(TraceVariant v);

struct TraceSpec {
  Scalar lambda = 0.8;
  TraceVariant variant = TraceVariant::retrace;
  int horizon = 5;
  Scalar gamma = 0.99;

  void validate() const;
};

/// Counts behavior log-probabilities that hit the floor before a ratio was formed.
struct TraceStats {
  std::uint64_t clamped = 0;
};

/// Behavior log-probabilities are clamped here before ratios are formed.
inline const Scalar kBehaviorLogFloor = std::log(1e-8);

/// delta = r + gamma * q_next * (1 - terminal) - q_t.
inline Scalar td_delta(Scalar q_t, Scalar reward, Scalar q_next, bool terminal, Scalar gamma) {
  return reward + (terminal ? 0.0 : gamma * q_next) - q_t;
}

/// retrace: lambda * min(1, pi / beta); tree_backup: lambda * min(1, pi);
/// importance_sampling: pi / beta; sarsa: lambda. Joint quantities (products over agents).
Scalar trace_coeff(const TraceSpec& spec, Scalar joint_pi_logprob, Scalar joint_beta_logprob, Scalar joint_pi_prob,
                   TraceStats* stats = nullptr);

/// Per-step quantities the return operator consumes. `q_taken` is Q_tot(tau_t, u_t) and
/// `q_next` is Q_tot(tau_{t+1}, u'_{t+1}) with u' drawn from the current policies.
struct StepTerms {
  Scalar q_taken = 0.0;
  Scalar q_next = 0.0;
  Scalar reward = 0.0;
  bool terminal = false;
  Scalar joint_logpi = 0.0;
  Scalar joint_logbeta = 0.0;
  Scalar joint_pi_prob = 1.0;
};

/// R Q_tot(tau_t, u_t) = q_taken[0] + sum_{i < min(n, |window|)} gamma^i (prod_{j=1..i} c_j) delta_i.
/// `window[0]` is the anchor step.
Scalar retrace_target(std::span<const StepTerms> window, const TraceSpec& spec, TraceStats* stats = nullptr);

/// Targets for every anchor of an episode (each window truncated at the episode end).
std::vector<Scalar> retrace_targets(std::span<const StepTerms> episode, const TraceSpec& spec,
                                    TraceStats* stats = nullptr);

}  // namespace mcem::critic

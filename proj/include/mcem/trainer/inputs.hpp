#pragma once

#include "mcem/envs/environment.hpp"
#include "mcem/replay/replay_buffer.hpp"

namespace mcem::trainer {

/// Per-step agent features f_t = [z_t; u_{t-1}; agent one-hot], stacked over a window of the
/// `window` most recent steps (newest first, zero padded before the episode start).
struct InputLayout {
  int num_agents = 1;
  Index obs_dim = 1;
  Index action_size = 1;
  bool discrete = true;
  int window = 1;
  bool prev_action = true;
  bool agent_id = false;

  static InputLayout from_env(const envs::EnvSpec& spec, int window, bool prev_action, bool agent_id);

  Index feature_size() const;
  Index input_size() const { return feature_size() * window; }

  /// Action encoding used as a feature: one-hot (discrete) or the clipped vector.
  Vec action_feature(const Vec& action, Scalar low, Scalar high) const;
  Vec feature(const Vec& observation, const Vec& prev_action_feature, int agent) const;
};

/// Incremental window builder for acting in an environment.
class InputHistory {
 public:
  InputHistory() = default;
  InputHistory(const InputLayout& layout, int agent, Scalar action_low, Scalar action_high);

  /// Pushes the observation reached after `prev_action` (nullptr at the first step) and returns
  /// the network input for this step.
  Vec push(const Vec& observation, const Vec* prev_action);

 private:
  InputLayout layout_;
  int agent_ = 0;
  Scalar low_ = -1.0;
  Scalar high_ = 1.0;
  std::vector<Vec> features_;
};

/// Network inputs of agent `a` for every step of `episode` plus the final observation:
/// input_size x (T + 1).
Mat episode_inputs(const InputLayout& layout, const replay::Episode& episode, int agent, Scalar action_low,
                   Scalar action_high);

/// Stored actions of agent `a`: action rows x T (a single index row for discrete spaces).
Mat episode_actions(const replay::Episode& episode, int agent);

/// Global states s_0 .. s_T: state_dim x (T + 1).
Mat episode_states(const replay::Episode& episode);

}  // namespace mcem::trainer

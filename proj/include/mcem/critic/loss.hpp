#pragma once

#include "mcem/critic/agent_critic.hpp"
#include "mcem/critic/mixer.hpp"

#include <span>
#include <vector>

namespace mcem::critic {

/// One trajectory's worth of critic inputs with precomputed (constant) targets.
struct CriticSequence {
  std::vector<Mat> agent_inputs;  // per agent: input x T
  std::vector<Mat> actions;       // per agent: action x T
  Mat states;                     // state x T
  Vec targets;                    // T
};

struct LossResult {
  Scalar loss = 0.0;
  Index count = 0;
};

/// Q_tot(tau_t, u_t) for every step of a sequence.
Vec predict_q_tot(const CriticSequence& seq, std::span<const AgentCritic> critics, const Mixer& mixer);

/// Mean squared error between targets and Q_tot over every step of every sequence. With
/// `accumulate` the gradients flow through the mixer into psi and through every Q^a into phi^a;
/// targets are treated as constants.
LossResult critic_loss(std::span<const CriticSequence> batch, std::span<AgentCritic> critics, Mixer& mixer,
                       bool accumulate = true);

}  // namespace mcem::critic

#pragma once

#include "mcem/critic/mixer.hpp"
#include "mcem/policy/distribution.hpp"

#include <cstdint>
#include <string>

namespace mcem::oracle {

/// Worst coordinate of an analytic-vs-central-difference comparison.
struct GradCheck {
  std::size_t coordinates = 0;
  Scalar max_rel_error = 0.0;
  std::string worst;

  bool pass(Scalar tol) const { return coordinates > 0 && max_rel_error < tol; }
};

// Each probe draws fresh parameters and inputs from `seed` and compares every parameter
// coordinate with central differences of step `h`.

/// sum_t <upstream_t, net(x)_t> for a random network.
GradCheck check_network_gradient(std::uint64_t seed, bool recurrent, Scalar h = 1e-5);

/// Main-policy objective: sum over steps and elites of sum_a log pi^a(u^a | tau^a).
GradCheck check_main_policy_gradient(std::uint64_t seed, policy::HeadKind kind, bool recurrent, Scalar h = 1e-5);

/// Proposal objective: the same plus entropy_coeff * H(pi-hat^a) per elite occurrence.
GradCheck check_proposal_policy_gradient(std::uint64_t seed, policy::HeadKind kind, bool recurrent,
                                         Scalar entropy_coeff = 0.03, Scalar h = 1e-5);

/// Centralized score-function objective: sum_t q_t sum_a log pi^a(u^a_t).
GradCheck check_centralized_policy_gradient(std::uint64_t seed, policy::HeadKind kind, Scalar h = 1e-5);

/// Critic regression loss through the mixer into every critic and hypernetwork parameter.
GradCheck check_critic_loss_gradient(std::uint64_t seed, critic::MixerMode mode, bool discrete, bool recurrent,
                                     Scalar h = 1e-5);

}  // namespace mcem::oracle

#pragma once

#include "mcem/policy/policy.hpp"

#include <functional>
#include <span>
#include <vector>

namespace mcem::policy {

struct JointActionSample {
  JointAction actions;
  std::vector<Scalar> per_agent_logprob;
  Scalar q_tot = 0.0;
};

/// The elite subset I(tau) of the sampled set E(tau).
struct EliteSet {
  std::vector<JointActionSample> elites;
  std::vector<std::size_t> sample_indices;  // positions of the elites inside E(tau)
  Scalar quantile = 0.0;
};

/// Batched joint-action evaluator: returns q_tot for every joint action in the span.
using QEvaluator = std::function<Vec(std::span<const JointAction>)>;

/// max(1, floor(N (1 - rho))). A 1e-9 slack absorbs the binary representation of rho.
std::size_t elite_count(std::size_t num_samples, Scalar rho);

/// Draws `num_samples` joint actions, agent a from `dists[a]`.
std::vector<JointActionSample> sample_joint_actions(std::span<const ActionDist> dists, std::size_t num_samples,
                                                    Rng& rng);

/// Keeps the top elite_count(N, rho) samples by q_tot; ties go to the earlier sample.
EliteSet select_elites(std::vector<JointActionSample> samples, Scalar rho);

/// Sampling, evaluation and elite selection for one joint history.
/// `sampling_dists` are the per-agent distributions actions are drawn from (the proposal
/// policies under the default configuration).
EliteSet mcem_elites(std::span<const ActionDist> sampling_dists, const QEvaluator& q_evaluator,
                     std::size_t num_samples, Scalar rho, Rng& rng);

/// Overload that evaluates the pairs' heads at per-agent encodings. When `from_proposal` is
/// false the main policies are sampled instead.
EliteSet mcem_elites(std::span<const PolicyPair> pairs, std::span<const Vec> encodings, const QEvaluator& q_evaluator,
                     std::size_t num_samples, Scalar rho, Rng& rng, bool from_proposal = true);

// Gradients below are with respect to each agent's raw head output; they are the
// per-record summands of the corresponding objectives.

/// sum over elites of grad log pi^a(u^a).
std::vector<Vec> main_policy_raw_gradient(std::span<const ActionDist> main_dists, const EliteSet& elites);

/// sum over elites of [grad log pi-hat^a(u^a) + beta grad H(pi-hat^a)]; the entropy term is
/// counted once per elite occurrence.
std::vector<Vec> proposal_policy_raw_gradient(std::span<const ActionDist> proposal_dists, const EliteSet& elites,
                                              Scalar entropy_coeff);

/// grad log pi^a(u^a) * q_tot for every agent (centralized-critic score function).
std::vector<Vec> centralized_policy_raw_gradient(std::span<const ActionDist> dists, const JointAction& u,
                                                 Scalar q_tot);

/// w^a Q^a grad log pi^a(u^a): per-agent gradients of a linearly decomposed critic.
std::vector<Vec> per_agent_policy_raw_gradient(std::span<const ActionDist> dists, const JointAction& u,
                                               const Vec& weights, const Vec& local_qs);

/// Single-record forms that also push the gradient into each policy's parameters,
/// treating the encodings as fixed inputs.
void main_policy_gradient(std::span<PolicyPair> pairs, std::span<const Vec> encodings, const EliteSet& elites);
void proposal_policy_gradient(std::span<PolicyPair> pairs, std::span<const Vec> encodings, const EliteSet& elites);
void centralized_policy_gradient(std::span<StochasticPolicy> policies, std::span<const Vec> encodings,
                                 const JointAction& u, Scalar q_tot);

}  // namespace mcem::policy

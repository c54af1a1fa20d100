#include "mcem/policy/mcem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcem::policy {

std::size_t elite_count(std::size_t num_samples, Scalar rho) {
  if (num_samples == 0) throw UsageError("elite_count: need at least one sample");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("elite quantile rho must lie in (0, 1)");
  const auto n = static_cast<Scalar>(num_samples);
  const auto k = static_cast<std::size_t>(std::floor(n * (1.0 - rho) + 1e-9));
  return std::max<std::size_t>(1, std::min(k, num_samples));
}

std::vector<JointActionSample> sample_joint_actions(std::span<const ActionDist> dists, std::size_t num_samples,
                                                    Rng& rng) {
  if (num_samples == 0) throw UsageError("MCEM needs at least one joint-action sample");
  if (dists.empty()) throw UsageError("MCEM needs at least one agent");
  std::vector<JointActionSample> samples(num_samples);
  for (auto& s : samples) {
    s.actions.reserve(dists.size());
    s.per_agent_logprob.reserve(dists.size());
    for (const auto& d : dists) {
      auto [u, lp] = d.sample(rng);
      s.actions.push_back(std::move(u));
      s.per_agent_logprob.push_back(lp);
    }
  }
  return samples;
}

EliteSet select_elites(std::vector<JointActionSample> samples, Scalar rho) {
  const std::size_t keep = elite_count(samples.size(), rho);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].q_tot > samples[b].q_tot; });
  EliteSet out;
  out.quantile = rho;
  out.elites.reserve(keep);
  out.sample_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  for (std::size_t i : out.sample_indices) out.elites.push_back(std::move(samples[i]));
  return out;
}

EliteSet mcem_elites(std::span<const ActionDist> sampling_dists, const QEvaluator& q_evaluator,
                     std::size_t num_samples, Scalar rho, Rng& rng) {
  elite_count(std::max<std::size_t>(num_samples, 1), rho);
  auto samples = sample_joint_actions(sampling_dists, num_samples, rng);
  std::vector<JointAction> joint(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) joint[i] = samples[i].actions;
  const Vec q = q_evaluator(joint);
  if (q.size() != static_cast<Index>(samples.size())) throw UsageError("q_evaluator returned the wrong count");
  if (!q.allFinite()) throw NumericalError("q_evaluator returned non-finite values");
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].q_tot = q(static_cast<Index>(i));
  return select_elites(std::move(samples), rho);
}

EliteSet mcem_elites(std::span<const PolicyPair> pairs, std::span<const Vec> encodings, const QEvaluator& q_evaluator,
                     std::size_t num_samples, Scalar rho, Rng& rng, bool from_proposal) {
  if (pairs.size() != encodings.size()) throw UsageError("one encoding per agent is required");
  std::vector<ActionDist> dists;
  dists.reserve(pairs.size());
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const auto& head = from_proposal ? pairs[a].proposal : pairs[a].main;
    dists.push_back(head.distribution(encodings[a]));
  }
  return mcem_elites(dists, q_evaluator, num_samples, rho, rng);
}

namespace {

std::vector<Vec> zero_grads(std::span<const ActionDist> dists) {
  std::vector<Vec> g;
  g.reserve(dists.size());
  for (const auto& d : dists) g.push_back(Vec::Zero(d.raw_size()));
  return g;
}

void check_agents(std::span<const ActionDist> dists, const JointAction& u) {
  if (u.size() != dists.size()) throw UsageError("joint action size differs from the number of agents");
}

}  // namespace

std::vector<Vec> main_policy_raw_gradient(std::span<const ActionDist> main_dists, const EliteSet& elites) {
  if (elites.elites.empty()) throw UsageError("elite set is empty");
  auto g = zero_grads(main_dists);
  for (const auto& e : elites.elites) {
    check_agents(main_dists, e.actions);
    for (std::size_t a = 0; a < main_dists.size(); ++a) g[a] += main_dists[a].log_prob_grad(e.actions[a]);
  }
  return g;
}

std::vector<Vec> proposal_policy_raw_gradient(std::span<const ActionDist> proposal_dists, const EliteSet& elites,
                                              Scalar entropy_coeff) {
  auto g = main_policy_raw_gradient(proposal_dists, elites);
  if (entropy_coeff != 0.0) {
    const auto reps = static_cast<Scalar>(elites.elites.size());
    for (std::size_t a = 0; a < proposal_dists.size(); ++a) {
      g[a] += (entropy_coeff * reps) * proposal_dists[a].entropy_grad();
    }
  }
  return g;
}

std::vector<Vec> centralized_policy_raw_gradient(std::span<const ActionDist> dists, const JointAction& u,
                                                 Scalar q_tot) {
  check_agents(dists, u);
  auto g = zero_grads(dists);
  if (q_tot == 0.0) return g;
  for (std::size_t a = 0; a < dists.size(); ++a) g[a] = q_tot * dists[a].log_prob_grad(u[a]);
  return g;
}

std::vector<Vec> per_agent_policy_raw_gradient(std::span<const ActionDist> dists, const JointAction& u,
                                               const Vec& weights, const Vec& local_qs) {
  check_agents(dists, u);
  if (weights.size() != static_cast<Index>(dists.size()) || local_qs.size() != weights.size()) {
    throw UsageError("per-agent gradient needs one weight and one local value per agent");
  }
  auto g = zero_grads(dists);
  for (std::size_t a = 0; a < dists.size(); ++a) {
    const auto ai = static_cast<Index>(a);
    g[a] = (weights(ai) * local_qs(ai)) * dists[a].log_prob_grad(u[a]);
  }
  return g;
}

namespace {

template <typename GetPolicy>
void push(std::size_t agents, std::span<const Vec> encodings, const std::vector<Vec>& grads, GetPolicy&& get) {
  for (std::size_t a = 0; a < agents; ++a) get(a).backprop_head(encodings[a], grads[a]);
}

}  // namespace

void main_policy_gradient(std::span<PolicyPair> pairs, std::span<const Vec> encodings, const EliteSet& elites) {
  if (pairs.size() != encodings.size()) throw UsageError("one encoding per agent is required");
  std::vector<ActionDist> dists;
  for (std::size_t a = 0; a < pairs.size(); ++a) dists.push_back(pairs[a].main.distribution(encodings[a]));
  const auto g = main_policy_raw_gradient(dists, elites);
  push(pairs.size(), encodings, g, [&](std::size_t a) -> StochasticPolicy& { return pairs[a].main; });
}

void proposal_policy_gradient(std::span<PolicyPair> pairs, std::span<const Vec> encodings, const EliteSet& elites) {
  if (pairs.size() != encodings.size()) throw UsageError("one encoding per agent is required");
  if (elites.elites.empty()) throw UsageError("elite set is empty");
  std::vector<Vec> g;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const ActionDist d = pairs[a].proposal.distribution(encodings[a]);
    Vec ga = Vec::Zero(d.raw_size());
    for (const auto& e : elites.elites) ga += d.log_prob_grad(e.actions[a]) + pairs[a].entropy_coeff * d.entropy_grad();
    g.push_back(std::move(ga));
  }
  push(pairs.size(), encodings, g, [&](std::size_t a) -> StochasticPolicy& { return pairs[a].proposal; });
}

void centralized_policy_gradient(std::span<StochasticPolicy> policies, std::span<const Vec> encodings,
                                 const JointAction& u, Scalar q_tot) {
  if (policies.size() != encodings.size()) throw UsageError("one encoding per agent is required");
  std::vector<ActionDist> dists;
  for (std::size_t a = 0; a < policies.size(); ++a) dists.push_back(policies[a].distribution(encodings[a]));
  const auto g = centralized_policy_raw_gradient(dists, u, q_tot);
  push(policies.size(), encodings, g, [&](std::size_t a) -> StochasticPolicy& { return policies[a]; });
}

}  // namespace mcem::policy

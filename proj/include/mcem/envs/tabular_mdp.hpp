#pragma once

#include "mcem/envs/environment.hpp"

namespace mcem::envs {

/// Finite multi-agent MDP with full observability (observation = one-hot state).
struct TabularMDPConfig {
  int num_states = 5;
  int num_agents = 2;
  int num_actions = 2;
  Mat transitions;  // (S * J) x S, row s * J + j is P(. | s, j)
  Mat rewards;      // S x J
  Scalar gamma = 0.9;
  int step_limit = 50;

  int num_joint() const;
  void validate() const;

  /// Dense random MDP: Dirichlet-like transition rows, rewards uniform in [-1, 1].
  static TabularMDPConfig random(int num_states, int num_agents, int num_actions, Scalar gamma, Rng& rng);
};

/// Per-agent stochastic policy tables, tables[a] is S x |U| with rows summing to one.
using PolicyTables = std::vector<Mat>;

/// pi(j | s) = prod_a pi^a(u^a | s), S x J.
Mat joint_policy(const TabularMDPConfig& mdp, const PolicyTables& tables);

/// Random strictly positive policy tables.
PolicyTables random_policy_tables(const TabularMDPConfig& mdp, Rng& rng);

class TabularMDP final : public Environment {
 public:
  explicit TabularMDP(TabularMDPConfig config);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "tabular_mdp"; }
  Observation reset(Rng& rng) override;
  StepResult step(const JointAction& u) override;
  Vec observe(int agent) const override;
  Vec state() const override;
  bool episode_success() const override { return false; }
  bool success_defined() const override { return false; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TabularMDP>(*this); }

  const TabularMDPConfig& config() const { return config_; }
  int current_state() const { return s_; }

 private:
  TabularMDPConfig config_;
  EnvSpec spec_;
  int s_ = 0;
  Rng rng_;
};

}  // namespace mcem::envs

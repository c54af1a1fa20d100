#include "mcem/envs/tabular_mdp.hpp"

#include <cmath>

namespace mcem::envs {

int TabularMDPConfig::num_joint() const {
  int j = 1;
  for (int a = 0; a < num_agents; ++a) j *= num_actions;
  return j;
}

void TabularMDPConfig::validate() const {
  if (num_states < 1 || num_agents < 1 || num_actions < 1) throw ConfigError("tabular MDP sizes must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("tabular MDP gamma must lie in [0, 1)");
  if (step_limit < 1) throw ConfigError("tabular MDP step limit must be >= 1");
  const int j = num_joint();
  if (transitions.rows() != num_states * j || transitions.cols() != num_states) {
    throw ConfigError("tabular MDP transitions must be (S*J) x S");
  }
  if (rewards.rows() != num_states || rewards.cols() != j) throw ConfigError("tabular MDP rewards must be S x J");
  for (Index r = 0; r < transitions.rows(); ++r) {
    if ((transitions.row(r).array() < 0.0).any() || std::abs(transitions.row(r).sum() - 1.0) > 1e-12) {
      throw ConfigError("tabular MDP transition row " + std::to_string(r) + " is not a distribution");
    }
  }
}

TabularMDPConfig TabularMDPConfig::random(int num_states, int num_agents, int num_actions, Scalar gamma, Rng& rng) {
  TabularMDPConfig c;
  c.num_states = num_states;
  c.num_agents = num_agents;
  c.num_actions = num_actions;
  c.gamma = gamma;
  const int j = c.num_joint();
  std::exponential_distribution<Scalar> expo(1.0);
  std::uniform_real_distribution<Scalar> unif(-1.0, 1.0);
  c.transitions.resize(num_states * j, num_states);
  for (Index r = 0; r < c.transitions.rows(); ++r) {
    for (Index s = 0; s < num_states; ++s) c.transitions(r, s) = expo(rng);
    c.transitions.row(r) /= c.transitions.row(r).sum();
  }
  c.rewards.resize(num_states, j);
  for (Index s = 0; s < num_states; ++s) {
    for (Index q = 0; q < j; ++q) c.rewards(s, q) = unif(rng);
  }
  return c;
}

Mat joint_policy(const TabularMDPConfig& mdp, const PolicyTables& tables) {
  if (static_cast<int>(tables.size()) != mdp.num_agents) throw UsageError("one policy table per agent required");
  const int j = mdp.num_joint();
  Mat out(mdp.num_states, j);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int q = 0; q < j; ++q) {
      const JointAction u = decode_joint_index(static_cast<std::size_t>(q), mdp.num_agents, mdp.num_actions);
      Scalar p = 1.0;
      for (int a = 0; a < mdp.num_agents; ++a) p *= tables[static_cast<std::size_t>(a)](s, action_index(u[static_cast<std::size_t>(a)]));
      out(s, q) = p;
    }
  }
  return out;
}

PolicyTables random_policy_tables(const TabularMDPConfig& mdp, Rng& rng) {
  std::uniform_real_distribution<Scalar> unif(0.1, 1.0);
  PolicyTables tables;
  for (int a = 0; a < mdp.num_agents; ++a) {
    Mat t(mdp.num_states, mdp.num_actions);
    for (Index s = 0; s < t.rows(); ++s) {
      for (Index u = 0; u < t.cols(); ++u) t(s, u) = unif(rng);
      t.row(s) /= t.row(s).sum();
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

TabularMDP::TabularMDP(TabularMDPConfig config) : config_(std::move(config)) {
  config_.validate();
  spec_.num_agents = config_.num_agents;
  spec_.discrete = true;
  spec_.num_actions = config_.num_actions;
  spec_.obs_dim = config_.num_states;
  spec_.state_dim = config_.num_states;
  spec_.step_limit = config_.step_limit;
  spec_.gamma = config_.gamma;
}

Observation TabularMDP::reset(Rng& rng) {
  rng_.seed(rng());
  s_ = 0;
  Observation o;
  for (int a = 0; a < config_.num_agents; ++a) o.observations.push_back(observe(a));
  o.state = state();
  return o;
}

StepResult TabularMDP::step(const JointAction& u) {
  check_joint_action(u);
  const auto j = static_cast<int>(joint_index(u, config_.num_actions));
  StepResult r;
  r.reward = config_.rewards(s_, j);
  const auto row = config_.transitions.row(static_cast<Index>(s_) * config_.num_joint() + j);
  std::uniform_real_distribution<Scalar> unif(0.0, 1.0);
  const Scalar x = unif(rng_);
  Scalar cum = 0.0;
  int next = config_.num_states - 1;
  for (int s = 0; s < config_.num_states; ++s) {
    cum += row(s);
    if (x < cum) {
      next = s;
      break;
    }
  }
  s_ = next;
  for (int a = 0; a < config_.num_agents; ++a) r.observations.push_back(observe(a));
  r.state = state();
  return r;
}

Vec TabularMDP::observe(int agent) const {
  if (agent < 0 || agent >= config_.num_agents) throw UsageError("agent index out of range");
  return state();
}

Vec TabularMDP::state() const {
  Vec v = Vec::Zero(config_.num_states);
  v(s_) = 1.0;
  return v;
}

}  // namespace mcem::envs

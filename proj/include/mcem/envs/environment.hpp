#pragma once

#include "mcem/core.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mcem::envs {

struct EnvSpec {
  int num_agents = 1;
  bool discrete = true;
  int num_actions = 1;  // |U| for discrete spaces
  int action_dim = 0;   // box dimension for continuous spaces
  Scalar action_low = -1.0;
  Scalar action_high = 1.0;
  int obs_dim = 1;
  int state_dim = 1;
  int step_limit = 1;
  Scalar gamma = 0.99;  // advisory

  Index action_size() const { return discrete ? num_actions : action_dim; }
  void validate() const;
};

struct Observation {
  std::vector<Vec> observations;
  Vec state;
};

struct StepResult {
  std::vector<Vec> observations;
  Vec state;
  Scalar reward = 0.0;
  bool terminal = false;
};

/// Cooperative partially observable task with a shared team reward.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual std::string name() const = 0;

  /// Starts an episode; everything stochastic afterwards is driven by a stream seeded here.
  virtual Observation reset(Rng& rng) = 0;
  virtual StepResult step(const JointAction& u) = 0;
  virtual Vec observe(int agent) const = 0;
  virtual Vec state() const = 0;

  /// Whether the episode so far counts as a success (optimal play / cooperative capture).
  virtual bool episode_success() const = 0;
  virtual bool success_defined() const { return true; }

  virtual std::unique_ptr<Environment> clone() const = 0;

 protected:
  /// Throws UsageError unless `u` has one in-space action per agent.
  void check_joint_action(const JointAction& u) const;
};

/// Joint action index in mixed radix, agent 0 most significant.
std::size_t joint_index(const JointAction& u, int num_actions);
JointAction decode_joint_index(std::size_t index, int num_agents, int num_actions);

}  // namespace mcem::envs

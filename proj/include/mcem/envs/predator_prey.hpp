#pragma once

#include "mcem/envs/environment.hpp"

#include <string_view>

namespace mcem::envs {

/// Continuous pursuit: N slow predators (learning agents) chase M faster scripted prey.
///
/// Per step the team receives +10 if some prey is within capture radius of a predator while
/// at least two predators are within the proximity radius of that prey, -1 if a capture
/// happens without that support, 0 otherwise.
struct PredatorPreyConfig {
  int num_predators = 3;
  int num_prey = 1;
  int num_landmarks = 2;
  Scalar world_half_extent = 1.0;
  Scalar predator_max_speed = 1.0;
  Scalar prey_max_speed = 1.3;
  Scalar predator_accel = 5.0;
  Scalar prey_accel = 5.0;
  Scalar view_radius = 1.0;
  Scalar capture_radius = 0.1;
  Scalar proximity_radius = 0.3;
  Scalar landmark_radius = 0.2;
  Scalar damping = 0.25;
  Scalar dt = 0.1;
  int step_limit = 25;
  Scalar cooperative_reward = 10.0;
  Scalar isolated_penalty = -1.0;
  bool random_prey = false;

  void validate() const;
  int obs_dim() const { return 4 + 5 * (num_predators - 1) + 5 * num_prey + 3 * num_landmarks; }
  int state_dim() const { return 4 * num_predators + 4 * num_prey + 2 * num_landmarks; }

  /// "3a1p", "6a2p", "9a3p".
  static PredatorPreyConfig preset(std::string_view name);
};

class PredatorPrey final : public Environment {
 public:
  using Point = Eigen::Vector2d;

  explicit PredatorPrey(PredatorPreyConfig config);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "predator_prey"; }
  Observation reset(Rng& rng) override;
  StepResult step(const JointAction& u) override;
  Vec observe(int agent) const override;
  Vec state() const override;
  bool episode_success() const override { return captured_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PredatorPrey>(*this); }

  const PredatorPreyConfig& config() const { return config_; }

  // Direct access for scenario tests.
  std::vector<Point>& predator_pos() { return pred_pos_; }
  std::vector<Point>& predator_vel() { return pred_vel_; }
  std::vector<Point>& prey_pos() { return prey_pos_; }
  std::vector<Point>& prey_vel() { return prey_vel_; }
  std::vector<Point>& landmark_pos() { return landmark_pos_; }
  /// Team reward for the current positions.
  Scalar reward() const;

 private:
  void integrate(Point& pos, Point& vel, const Point& accel, Scalar max_speed) const;
  Point prey_accel(int prey);

  PredatorPreyConfig config_;
  EnvSpec spec_;
  std::vector<Point> pred_pos_, pred_vel_, prey_pos_, prey_vel_, landmark_pos_;
  bool captured_ = false;
  Rng rng_;
};

}  // namespace mcem::envs

#pragma once

#include "mcem/envs/environment.hpp"

#include <filesystem>
#include <string_view>

namespace mcem::envs {

struct MatrixGameConfig {
  int num_agents = 2;
  int num_actions = 3;
  Vec payoff;  // |U|^k entries, mixed-radix joint-action order
  int episode_length = 1;

  void validate() const;
  Scalar max_payoff() const { return payoff.maxCoeff(); }
  Scalar payoff_at(const JointAction& u) const { return payoff(static_cast<Index>(joint_index(u, num_actions))); }

  /// Climbing-style game: [[11, -30, 0], [-30, 7, 6], [0, 0, 5]].
  static MatrixGameConfig climbing();
  /// Penalty game: [[10, 0, k], [0, 2, 0], [k, 0, 10]], miscoordination on the optima costs k.
  static MatrixGameConfig penalty(Scalar k = -100.0);
  static MatrixGameConfig preset(std::string_view name);
};

/// Reads one payoff per line (the last comma-separated field), row = joint-action index.
Vec load_payoff_csv(const std::filesystem::path& path);

class MatrixGame final : public Environment {
 public:
  explicit MatrixGame(MatrixGameConfig config);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "matrix_game"; }
  Observation reset(Rng& rng) override;
  StepResult step(const JointAction& u) override;
  Vec observe(int agent) const override;
  Vec state() const override;
  bool episode_success() const override { return success_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MatrixGame>(*this); }

  const MatrixGameConfig& config() const { return config_; }

 private:
  MatrixGameConfig config_;
  EnvSpec spec_;
  int t_ = 0;
  bool success_ = true;
};

}  // namespace mcem::envs

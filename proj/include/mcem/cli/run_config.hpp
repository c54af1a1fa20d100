#pragma once

#include "mcem/cli/config.hpp"
#include "mcem/envs/matrix_game.hpp"
#include "mcem/envs/predator_prey.hpp"
#include "mcem/envs/tabular_mdp.hpp"
#include "mcem/trainer/learner.hpp"

#include <memory>

namespace mcem::cli {

enum class EnvKind { matrix_game, predator_prey, tabular_mdp };

std::string to_string(EnvKind kind);

struct TabularSettings {
  int num_states = 5;
  int num_agents = 2;
  int num_actions = 2;
  Scalar gamma = 0.9;
  int step_limit = 50;
  std::uint64_t mdp_seed = 0;
};

/// Everything a run needs: environment, trainer settings, ablation flags and seeds.
struct RunConfig {
  EnvKind env_kind = EnvKind::matrix_game;
  std::string env_preset = "penalty";
  envs::MatrixGameConfig matrix = envs::MatrixGameConfig::penalty();
  envs::PredatorPreyConfig predator_prey;
  TabularSettings tabular;
  trainer::TrainConfig trainer;
  int checkpoint_period = 0;
  std::vector<std::uint64_t> seeds{1};

  /// Applies defaults (environment-dependent ones first), then every key of `tree`.
  /// Unknown sections or keys, malformed values and invalid combinations raise ConfigError
  /// anchored at the offending line.
  static RunConfig from_tree(const ConfigTree& tree);
  /// Every setting, defaults included; parsing it back yields an identical RunConfig.
  ConfigTree to_tree() const;

  std::unique_ptr<envs::Environment> make_env() const;
};

/// Defaults that depend only on the environment family: rho and |E| (0.8 / 10 for discrete
/// spaces, 0.9 / 20 for continuous ones) and episodes collected per iteration.
void apply_env_defaults(EnvKind kind, trainer::TrainConfig& config);

}  // namespace mcem::cli

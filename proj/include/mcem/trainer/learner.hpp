#pragma once

#include "mcem/approx/adam.hpp"
#include "mcem/critic/agent_critic.hpp"
#include "mcem/critic/loss.hpp"
#include "mcem/critic/mixer.hpp"
#include "mcem/critic/trace.hpp"
#include "mcem/envs/environment.hpp"
#include "mcem/policy/mcem.hpp"
#include "mcem/replay/replay_buffer.hpp"
#include "mcem/trainer/inputs.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mcem::trainer {

struct TrainConfig {
  int iterations = 100;
  int episodes_per_iter = 1;
  int batch_size = 8;
  Scalar rho = 0.8;
  int elite_samples = 10;
  critic::TraceSpec trace;
  Scalar entropy_coeff = 0.03;
  Scalar actor_lr = 5e-4;
  Scalar critic_lr = 5e-4;
  Scalar grad_clip = 10.0;  // global-norm clip of the critic step, 0 disables
  int target_sync = 200;
  int eval_period = 10;
  int eval_episodes = 10;
  std::uint64_t seed = 1;
  std::size_t buffer_capacity = 5000;
  int next_action_samples = 1;
  bool sample_from_proposal = true;

  // Ablation axes.
  critic::MixerMode mixer = critic::MixerMode::ncd_monotonic;
  bool on_policy = false;

  // Architecture.
  std::vector<Index> hidden_sizes{64, 64};
  approx::Activation activation = approx::Activation::elu;
  bool recurrent = false;
  Index gru_hidden = 64;
  int input_window = 1;
  bool prev_action_input = true;
  bool agent_id_input = false;
  Index mixer_embed = 32;
  Index hyper_hidden = 64;
  policy::GaussianBounds sigma;
  bool squash_mean = false;  // Gaussian means squashed into the action box

  bool log_seconds = false;

  void validate() const;
};

struct MetricsRow {
  std::int64_t iteration = 0;
  std::int64_t env_steps = 0;
  Scalar return_mean = 0.0;
  Scalar success_rate = 0.0;
  Scalar critic_loss = 0.0;
  Scalar entropy_main = 0.0;
  Scalar entropy_prop = 0.0;
  Scalar seconds = 0.0;
  bool skipped = false;
};

inline constexpr const char* kMetricsHeader =
    "iter,env_steps,return_mean,success_rate,critic_loss,entropy_main,entropy_prop,seconds";
std::string format_metrics_row(const MetricsRow& row);

enum class EvalMode { stochastic, greedy };

struct EvalResult {
  Scalar return_mean = 0.0;
  Scalar return_stderr = 0.0;
  Scalar success_rate = 0.0;
  std::vector<Scalar> returns;
};

/// Plays one episode with the given per-agent policies. `rng` drives both the environment
/// reset and action sampling. Behavior log-probabilities are recorded in every step.
replay::Episode run_episode(envs::Environment& env, const std::vector<const policy::StochasticPolicy*>& policies,
                            const InputLayout& layout, Rng& rng, EvalMode mode);

/// Mean return / success over `episodes` episodes. Greedy mode acts with argmax / mean actions.
EvalResult evaluate(envs::Environment& env, const std::vector<const policy::StochasticPolicy*>& policies,
                    const InputLayout& layout, int episodes, Rng& rng, EvalMode mode);

/// Learner state for one seed: policies, critics, mixer, targets, optimizers, replay and rngs.
class Learner {
 public:
  using CallLog = std::function<void(const std::string&)>;

  Learner(const envs::Environment& env, TrainConfig config);
  Learner(const Learner& other);
  Learner& operator=(const Learner& other);
  Learner(Learner&&) noexcept = default;
  Learner& operator=(Learner&&) noexcept = default;

  const TrainConfig& config() const { return config_; }
  const InputLayout& layout() const { return layout_; }
  const envs::Environment& env() const { return *env_; }

  /// Appends `episodes` episodes played by the main policies; returns the environment steps taken.
  std::size_t collect(int episodes);
  /// One critic step followed by one MCEM policy step on a sampled batch.
  MetricsRow train_iteration();
  /// collect, train_iteration, target sync and scheduled evaluation.
  MetricsRow step();

  EvalResult evaluate(int episodes, EvalMode mode);
  std::vector<const policy::StochasticPolicy*> main_policies() const;

  std::vector<policy::PolicyPair>& policies() { return pairs_; }
  const std::vector<policy::PolicyPair>& policies() const { return pairs_; }
  std::vector<critic::AgentCritic>& critics() { return critics_; }
  const std::vector<critic::AgentCritic>& critics() const { return critics_; }
  critic::Mixer& mixer() { return mixer_; }
  const critic::Mixer& mixer() const { return mixer_; }
  replay::ReplayBuffer& buffer() { return buffer_; }
  const replay::ReplayBuffer& buffer() const { return buffer_; }
  const critic::TraceStats& trace_stats() const { return trace_stats_; }

  std::int64_t iteration() const { return iteration_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t last_eval_iteration() const { return last_eval_iteration_; }
  const EvalResult& last_greedy_eval() const { return last_greedy_; }
  const EvalResult& last_stochastic_eval() const { return last_stochastic_; }

  void set_call_log(CallLog log) { call_log_ = std::move(log); }

  /// Complete learner state, enough to continue training bit-identically.
  approx::TensorList state_tensors() const;
  /// Restores from `state_tensors` output; leaves *this untouched on any error.
  void restore_state(const approx::TensorList& tensors);
  void save_checkpoint(const std::filesystem::path& path) const;
  void load_checkpoint(const std::filesystem::path& path);

 private:
  struct BatchItem;

  BatchItem prepare(const replay::Episode& episode);
  void sync_targets();
  void log(const std::string& event) const {
    if (call_log_) call_log_(event);
  }

  TrainConfig config_;
  std::unique_ptr<envs::Environment> env_;
  std::unique_ptr<envs::Environment> eval_env_;
  InputLayout layout_;
  critic::TraceSpec trace_;

  std::vector<policy::PolicyPair> pairs_;
  std::vector<critic::AgentCritic> critics_;
  std::vector<critic::AgentCritic> target_critics_;
  critic::Mixer mixer_;
  critic::Mixer target_mixer_;

  std::vector<approx::OptimState> opt_main_, opt_prop_, opt_critic_;
  approx::OptimState opt_mixer_;

  replay::ReplayBuffer buffer_;
  Rng collect_rng_, train_rng_, eval_rng_;

  std::int64_t iteration_ = 0;
  std::int64_t env_steps_ = 0;
  std::int64_t last_eval_iteration_ = -1;
  EvalResult last_greedy_, last_stochastic_;
  critic::TraceStats trace_stats_;
  std::chrono::steady_clock::time_point start_;
  CallLog call_log_;
};

}  // namespace mcem::trainer

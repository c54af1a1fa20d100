#pragma once

#include "mcem/cli/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mcem::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;  // "section.key=value"
  std::optional<std::uint64_t> seed;
  std::string seeds;                    // "a,b,c"
  std::filesystem::path out = "runs";
  bool parallel_seeds = false;
};

/// Parses the config file, applies --set overrides and --seed/--seeds.
RunConfig load_run_config(const CommonOptions& options);

struct RunSummary {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  std::vector<trainer::MetricsRow> rows;  // rows trained by this call
  std::vector<std::int64_t> eval_iterations;  // every row of eval.csv
  std::vector<Scalar> eval_returns;           // greedy
};

/// Trains one seed into `dir` (config.resolved, metrics.csv, eval.csv, checkpoints/).
/// With `resume` the learner state is loaded first and metrics rows past it are dropped.
RunSummary train_run(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& dir,
                     const std::optional<std::filesystem::path>& resume = std::nullopt);

/// Mean greedy return over the last `window` evaluation points.
Scalar final_smoothed_return(const RunSummary& run, std::size_t window = 10);

int cmd_train(const CommonOptions& options, const std::optional<std::filesystem::path>& resume);
int cmd_eval(const CommonOptions& options, const std::filesystem::path& checkpoint, int episodes, std::ostream& out);
int cmd_ablate(const CommonOptions& options);
int cmd_verify(const std::vector<std::string>& suites, std::ostream& out);

/// Entry point of the `mcem` executable.
int run_cli(int argc, char** argv);

}  // namespace mcem::cli

#include "mcem/cli/commands.hpp"

#include "CLI11.hpp"
#include "log.hpp"
#include "mcem/cli/svg.hpp"
#include "mcem/oracle/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace mcem::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--seeds: '" + item + "' is not a nonnegative integer");
    }
  }
  if (out.empty()) throw ConfigError("--seeds: empty seed list");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string eval_header() { return "iter,return_greedy,success_greedy,return_stochastic,success_stochastic"; }

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

/// Keeps the header and rows whose leading iteration is <= `iteration`.
void truncate_csv(const fs::path& path, std::int64_t iteration, const std::string& header) {
  std::vector<std::string> keep{header};
  if (fs::exists(path)) {
    const auto lines = read_lines(path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto comma = lines[i].find(',');
      if (comma == std::string::npos) continue;
      if (std::stoll(lines[i].substr(0, comma)) <= iteration) keep.push_back(lines[i]);
    }
  }
  std::string text;
  for (const auto& l : keep) text += l + "\n";
  write_text(path, text);
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log_line(LogLevel::error, e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    log_line(LogLevel::error, e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log_line(LogLevel::error, e.what());
    return kExitFailure;
  }
}

std::vector<RunSummary> run_seeds(const RunConfig& rc, const fs::path& base, bool parallel) {
  std::vector<RunSummary> out(rc.seeds.size());
  auto job = [&](std::size_t i) {
    const std::uint64_t seed = rc.seeds[i];
    out[i] = train_run(rc, seed, base / ("seed_" + std::to_string(seed)));
  };
  if (!parallel || rc.seeds.size() == 1) {
    for (std::size_t i = 0; i < rc.seeds.size(); ++i) job(i);
    return out;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(rc.seeds.size());
  for (std::size_t i = 0; i < rc.seeds.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string help_footer() {
  return "Defaults (override with --set section.key=value):\n"
         "  trainer.rho            0.8 discrete / 0.9 continuous (paper)\n"
         "  trainer.elite_samples  10 discrete / 20 continuous (paper)\n"
         "  trainer.entropy_coeff  0.03 (artifact default)\n"
         "  trainer.lambda         0.8 (artifact default)\n"
         "  trainer.horizon        5 (artifact default)\n"
         "  trainer.gamma          0.99, tabular MDPs use their own (artifact default)\n"
         "  trainer.episodes_per_iter 1 matrix/tabular, 4 predator-prey (artifact default)\n"
         "  trainer.batch_size     8 (artifact default)\n"
         "  trainer.actor_lr, critic_lr 5e-4 (artifact default)\n"
         "  trainer.target_sync    200 (artifact default)\n"
         "  network.hidden         [64, 64], elu (artifact default)\n"
         "  network.mixer_embed    32, hyper_hidden 64 (artifact default)\n"
         "  network.sigma_min, sigma_max 1e-3, 2 (artifact default)\n"
         "  network.squash_mean    false; true maps the Gaussian mean into the action box with tanh (artifact default)\n"
         "Determinism holds per seed in single-worker mode; --parallel-seeds runs seeds in separate\n"
         "workers, each still deterministic. MCEM_LOG=error|info|debug sets log verbosity.\n";
}

}  // namespace

RunConfig load_run_config(const CommonOptions& options) {
  if (options.config.empty()) throw ConfigError("--config is required");
  ConfigTree tree = ConfigTree::parse_file(options.config);
  for (const auto& o : options.overrides) tree.apply_override(o);
  RunConfig rc = RunConfig::from_tree(tree);
  if (!options.seeds.empty()) rc.seeds = parse_seed_list(options.seeds);
  if (options.seed) rc.seeds = {*options.seed};
  return rc;
}

RunSummary train_run(const RunConfig& config, std::uint64_t seed, const fs::path& dir,
                     const std::optional<fs::path>& resume) {
  RunConfig rc = config;
  rc.seeds = {seed};
  fs::create_directories(dir / "checkpoints");
  write_text(dir / "config.resolved", rc.to_tree().write());

  const auto env = rc.make_env();
  trainer::TrainConfig tc = rc.trainer;
  tc.seed = seed;
  trainer::Learner learner(*env, tc);
  if (log_level() >= LogLevel::debug) {
    learner.set_call_log([seed](const std::string& ev) { log_line(LogLevel::debug, "seed " + std::to_string(seed) + ": " + ev); });
  }
  const fs::path metrics_path = dir / "metrics.csv";
  const fs::path eval_path = dir / "eval.csv";
  if (resume) {
    learner.load_checkpoint(*resume);
    truncate_csv(metrics_path, learner.iteration(), trainer::kMetricsHeader);
    truncate_csv(eval_path, learner.iteration(), eval_header());
    log_line(LogLevel::info, "seed " + std::to_string(seed) + ": resumed at iteration " +
                                 std::to_string(learner.iteration()));
  } else {
    write_text(metrics_path, std::string(trainer::kMetricsHeader) + "\n");
    write_text(eval_path, eval_header() + "\n");
  }
  std::ofstream metrics(metrics_path, std::ios::app);
  std::ofstream evals(eval_path, std::ios::app);

  RunSummary summary;
  summary.seed = seed;
  summary.dir = dir;
  while (learner.iteration() < tc.iterations) {
    const trainer::MetricsRow row = learner.step();
    if (row.skipped) log_line(LogLevel::info, "iteration " + std::to_string(row.iteration) + ": empty buffer, skipped");
    metrics << trainer::format_metrics_row(row) << "\n";
    metrics.flush();
    if (learner.last_eval_iteration() == learner.iteration()) {
      const auto& g = learner.last_greedy_eval();
      const auto& s = learner.last_stochastic_eval();
      evals << learner.iteration() << "," << format_scalar(g.return_mean) << "," << format_scalar(g.success_rate)
            << "," << format_scalar(s.return_mean) << "," << format_scalar(s.success_rate) << "\n";
      evals.flush();
      log_line(LogLevel::info, "seed " + std::to_string(seed) + " iter " + std::to_string(row.iteration) +
                                   " steps " + std::to_string(row.env_steps) + " return " +
                                   format_scalar(g.return_mean) + " critic_loss " + format_scalar(row.critic_loss));
    }
    if (rc.checkpoint_period > 0 && learner.iteration() % rc.checkpoint_period == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "iter_%06lld.ckpt", static_cast<long long>(learner.iteration()));
      learner.save_checkpoint(dir / "checkpoints" / name);
    }
    summary.rows.push_back(row);
  }
  learner.save_checkpoint(dir / "checkpoints" / "final.ckpt");
  metrics.close();
  evals.close();
  const auto lines = read_lines(eval_path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_list("[" + lines[i] + "]");
    if (fields.size() < 2) continue;
    summary.eval_iterations.push_back(std::stoll(fields[0]));
    summary.eval_returns.push_back(std::stod(fields[1]));
  }
  return summary;
}

Scalar final_smoothed_return(const RunSummary& run, std::size_t window) {
  const auto& r = run.eval_returns;
  if (r.empty()) return std::numeric_limits<Scalar>::quiet_NaN();
  const std::size_t n = std::min(window, r.size());
  Scalar sum = 0.0;
  for (std::size_t i = r.size() - n; i < r.size(); ++i) sum += r[i];
  return sum / static_cast<Scalar>(n);
}

int cmd_train(const CommonOptions& options, const std::optional<fs::path>& resume) {
  return guarded([&] {
    const RunConfig rc = load_run_config(options);
    if (resume) {
      if (rc.seeds.size() != 1) throw ConfigError("--resume needs exactly one seed");
      train_run(rc, rc.seeds[0], options.out / ("seed_" + std::to_string(rc.seeds[0])), resume);
    } else {
      run_seeds(rc, options.out, options.parallel_seeds);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_eval(const CommonOptions& options, const fs::path& checkpoint, int episodes, std::ostream& out) {
  return guarded([&] {
    if (episodes < 1) throw ConfigError("--episodes must be >= 1");
    const RunConfig rc = load_run_config(options);
    const auto env = rc.make_env();
    trainer::TrainConfig tc = rc.trainer;
    tc.seed = rc.seeds.front();
    trainer::Learner learner(*env, tc);
    try {
      learner.load_checkpoint(checkpoint);
    } catch (const LoadError& e) {
      throw ConfigError(std::string("checkpoint does not match the configured environment: ") + e.what());
    }
    auto run_env = rc.make_env();
    const auto policies = learner.main_policies();
    Rng greedy_rng = make_rng(tc.seed, 0xe7a1);
    Rng stochastic_rng = make_rng(tc.seed, 0xe7a2);
    const auto g = trainer::evaluate(*run_env, policies, learner.layout(), episodes, greedy_rng,
                                     trainer::EvalMode::greedy);
    const auto s = trainer::evaluate(*run_env, policies, learner.layout(), episodes, stochastic_rng,
                                     trainer::EvalMode::stochastic);
    out << "mode,return_mean,return_stderr,success_rate,episodes\n";
    out << "greedy," << format_scalar(g.return_mean) << "," << format_scalar(g.return_stderr) << ","
        << format_scalar(g.success_rate) << "," << episodes << "\n";
    out << "stochastic," << format_scalar(s.return_mean) << "," << format_scalar(s.return_stderr) << ","
        << format_scalar(s.success_rate) << "," << episodes << "\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_ablate(const CommonOptions& options) {
  return guarded([&] {
    const RunConfig base = load_run_config(options);
    struct Variant {
      std::string name;
      RunConfig config;
    };
    std::vector<Variant> variants;
    RunConfig rc = base;
    rc.trainer.mixer = critic::MixerMode::ncd_monotonic;
    rc.trainer.trace.variant = critic::TraceVariant::retrace;
    rc.trainer.on_policy = false;
    variants.push_back({"mcem_ncd", rc});
    RunConfig linear = rc;
    linear.trainer.mixer = critic::MixerMode::linear;
    variants.push_back({"mcem_ncd_linear", linear});
    RunConfig on_policy = rc;
    on_policy.trainer.on_policy = true;
    variants.push_back({"mcem_ncd_on_policy", on_policy});
    RunConfig tb = rc;
    tb.trainer.trace.variant = critic::TraceVariant::tree_backup;
    variants.push_back({"mcem_ncd_tree_backup", tb});

    struct Result {
      std::string name;
      Scalar mean = 0.0;
      Scalar stderr_ = 0.0;
      std::vector<RunSummary> runs;
    };
    std::vector<Result> results;
    std::ostringstream curves;
    curves << "variant,seed,iter,env_steps,return_mean\n";
    std::vector<Series> plot;
    for (const auto& v : variants) {
      log_line(LogLevel::info, "ablation variant " + v.name);
      Result r;
      r.name = v.name;
      r.runs = run_seeds(v.config, options.out / v.name, options.parallel_seeds);
      std::vector<Scalar> finals;
      for (const auto& run : r.runs) {
        finals.push_back(final_smoothed_return(run));
        for (const auto& row : run.rows) {
          curves << v.name << "," << run.seed << "," << row.iteration << "," << row.env_steps << ","
                 << format_scalar(row.return_mean) << "\n";
        }
      }
      const auto n = static_cast<Scalar>(finals.size());
      for (Scalar f : finals) r.mean += f / n;
      if (finals.size() > 1) {
        Scalar ss = 0.0;
        for (Scalar f : finals) ss += (f - r.mean) * (f - r.mean);
        r.stderr_ = std::sqrt(ss / (n - 1.0) / n);
      }
      // Seed-mean curve, smoothed over 10 iterations.
      Series s;
      s.name = v.name;
      const std::size_t len = r.runs.empty() ? 0 : r.runs.front().rows.size();
      std::vector<Scalar> mean(len, 0.0);
      for (const auto& run : r.runs) {
        for (std::size_t i = 0; i < len && i < run.rows.size(); ++i) mean[i] += run.rows[i].return_mean / n;
      }
      for (std::size_t i = 0; i < len; ++i) s.x.push_back(static_cast<Scalar>(r.runs.front().rows[i].iteration));
      s.y = moving_average(mean, 10);
      plot.push_back(std::move(s));
      results.push_back(std::move(r));
    }
    std::vector<std::size_t> order(results.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].mean > results[b].mean; });
    std::ostringstream summary;
    summary << "rank,variant,final_return_mean,final_return_stderr,seeds\n";
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const Result& r = results[order[rank]];
      summary << rank + 1 << "," << r.name << "," << format_scalar(r.mean) << "," << format_scalar(r.stderr_) << ","
              << r.runs.size() << "\n";
    }
    fs::create_directories(options.out);
    write_text(options.out / "summary.csv", summary.str());
    write_text(options.out / "curves.csv", curves.str());
    write_text(options.out / "returns.svg",
               line_chart(plot, "Ablation: seed-mean greedy return (window 10)", "iteration", "return"));
    return static_cast<int>(kExitOk);
  });
}

int cmd_verify(const std::vector<std::string>& suites, std::ostream& out) {
  using Runner = oracle::SuiteResult (*)();
  static const std::vector<std::pair<std::string, Runner>> registry{
      {"igm", [] { return oracle::igm_suite(); }},
      {"monotonicity", [] { return oracle::monotonicity_suite(); }},
      {"gradients", [] { return oracle::gradient_suite(); }},
      {"retrace", [] { return oracle::retrace_suite(); }},
      {"coefficients", [] { return oracle::coefficient_suite(); }},
      {"theorem51", [] { return oracle::theorem51_suite(); }},
      {"quantile", [] { return oracle::quantile_suite(); }},
      {"entropy", [] { return oracle::entropy_suite(); }},
  };
  std::vector<std::string> selected;
  for (const auto& name : suites.empty() ? std::vector<std::string>{"all"} : suites) {
    const std::string key = name == "retrace-fixed-point" ? "retrace" : name;
    if (key == "all") {
      for (const auto& [n, fn] : registry) selected.push_back(n);
      continue;
    }
    const bool known = std::any_of(registry.begin(), registry.end(), [&](const auto& e) { return e.first == key; });
    if (!known) {
      log_line(LogLevel::error, "unknown verify suite '" + name +
                                    "' (expected igm, monotonicity, gradients, retrace, coefficients, theorem51, "
                                    "quantile, entropy or all)");
      return kExitUsage;
    }
    if (std::find(selected.begin(), selected.end(), key) == selected.end()) selected.push_back(key);
  }
  return guarded([&] {
    int n = 0;
    bool all_pass = true;
    for (const auto& key : selected) {
      const auto it = std::find_if(registry.begin(), registry.end(), [&](const auto& e) { return e.first == key; });
      out << "# suite " << key << "\n";
      const auto t0 = std::chrono::steady_clock::now();
      const oracle::SuiteResult r = it->second();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& note : r.notes) out << "# " << note << "\n";
      for (const auto& c : r.checks) {
        out << (c.pass ? "ok " : "not ok ") << ++n << " - " << key << ": " << c.name;
        if (!c.diagnostic.empty()) out << " # " << c.diagnostic;
        out << "\n";
      }
      out << "# suite " << key << (r.pass() ? " passed" : " FAILED") << " in " << std::fixed << std::setprecision(2) << secs << std::defaultfloat << " s\n";
      out.flush();
      all_pass = all_pass && r.pass();
    }
    out << "1.." << n << "\n";
    return static_cast<int>(all_pass ? kExitOk : kExitFailure);
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"MCEM-NCD multi-agent training and verification harness"};
  app.footer(help_footer());
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool seeds) {
    sub->add_option("--config", common.config, "run configuration file")->required();
    sub->add_option("--set", common.overrides, "override a setting, section.key=value (repeatable)");
    sub->add_option("--seed", common.seed, "single seed (overrides run.seeds)");
    if (seeds) {
      sub->add_option("--seeds", common.seeds, "comma-separated seed list (overrides run.seeds)");
      sub->add_option("--out", common.out, "output directory")->capture_default_str();
      sub->add_flag("--parallel-seeds", common.parallel_seeds, "train seeds in parallel workers");
    }
  };

  std::optional<fs::path> resume;
  std::string resume_text;
  auto* train = app.add_subcommand("train", "train one run directory per seed");
  add_common(train, true);
  train->add_option("--resume", resume_text, "continue from a checkpoint (single seed)");

  std::string checkpoint;
  int episodes = 100;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint; prints greedy and stochastic rows as CSV");
  add_common(eval, false);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "evaluation episodes")->capture_default_str();

  auto* ablate = app.add_subcommand("ablate", "run the base method and its linear / on-policy / tree-backup variants");
  add_common(ablate, true);

  std::vector<std::string> suites;
  auto* verify = app.add_subcommand("verify", "run oracle suites: igm monotonicity gradients retrace coefficients theorem51 quantile entropy all");
  verify->add_option("suites", suites, "suite names (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (!resume_text.empty()) resume = fs::path(resume_text);
  if (*train) return cmd_train(common, resume);
  if (*eval) return cmd_eval(common, checkpoint, episodes, std::cout);
  if (*ablate) return cmd_ablate(common);
  if (*verify) return cmd_verify(suites, std::cout);
  return kExitUsage;
}

}  // namespace mcem::cli

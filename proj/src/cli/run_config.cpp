#include "mcem/cli/run_config.hpp"

namespace mcem::cli {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out + "]";
}

std::string b(bool v) { return v ? "true" : "false"; }
std::string f(Scalar v) { return format_scalar(v); }
template <typename T>
std::string i(T v) {
  return std::to_string(v);
}

}  // namespace

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::matrix_game: return "matrix_game";
    case EnvKind::predator_prey: return "predator_prey";
    case EnvKind::tabular_mdp: return "tabular_mdp";
  }
  return "matrix_game";
}

void apply_env_defaults(EnvKind kind, trainer::TrainConfig& c) {
  const bool continuous = kind == EnvKind::predator_prey;
  c.rho = continuous ? 0.9 : 0.8;
  c.elite_samples = continuous ? 20 : 10;
  c.episodes_per_iter = continuous ? 4 : 1;
  c.trace.gamma = kind == EnvKind::tabular_mdp ? 0.9 : 0.99;
}

RunConfig RunConfig::from_tree(const ConfigTree& tree) {
  RunConfig rc;
  const auto env_sections = tree.sections_with_prefix("env");
  if (env_sections.empty()) throw ConfigError("config has no [env.<kind>] section (matrix_game|predator_prey|tabular_mdp)");
  if (env_sections.size() > 1) {
    throw ConfigError(env_sections[1]->origin + ": config must contain exactly one env section, found [" +
                      env_sections[0]->name + "] and [" + env_sections[1]->name + "]");
  }
  for (const auto& s : tree.sections()) {
    if (s.name.rfind("env", 0) == 0) continue;
    if (s.name != "trainer" && s.name != "variant" && s.name != "network" && s.name != "run") {
      throw ConfigError(s.origin + ": unknown section [" + s.name + "]");
    }
  }
  const ConfigSection* es = env_sections[0];
  const std::string kind = es->name == "env" ? "" : es->name.substr(4);
  if (kind == "matrix_game") {
    rc.env_kind = EnvKind::matrix_game;
  } else if (kind == "predator_prey") {
    rc.env_kind = EnvKind::predator_prey;
  } else if (kind == "tabular_mdp") {
    rc.env_kind = EnvKind::tabular_mdp;
  } else {
    throw ConfigError(es->origin + ": env section must be [env.matrix_game], [env.predator_prey] or [env.tabular_mdp]");
  }
  apply_env_defaults(rc.env_kind, rc.trainer);

  SectionReader env(es, es->name);
  switch (rc.env_kind) {
    case EnvKind::matrix_game: {
      rc.env_preset = "penalty";
      env.read("preset", rc.env_preset);
      Scalar k = -100.0;
      env.read("penalty_k", k);
      if (rc.env_preset == "penalty") {
        rc.matrix = envs::MatrixGameConfig::penalty(k);
      } else if (rc.env_preset == "climbing") {
        rc.matrix = envs::MatrixGameConfig::climbing();
      } else if (rc.env_preset != "custom") {
        env.fail("preset", "expected climbing, penalty or custom, got '" + rc.env_preset + "'");
      }
      env.read("num_agents", rc.matrix.num_agents);
      env.read("num_actions", rc.matrix.num_actions);
      env.read("episode_length", rc.matrix.episode_length);
      std::string csv;
      env.read("payoff_csv", csv);
      if (!csv.empty()) rc.matrix.payoff = envs::load_payoff_csv(csv);
      std::vector<Scalar> payoff;
      env.read("payoff", payoff);
      if (!payoff.empty()) rc.matrix.payoff = Eigen::Map<const Vec>(payoff.data(), static_cast<Index>(payoff.size()));
      if (rc.env_preset == "custom" && rc.matrix.payoff.size() == 0) {
        env.fail("preset", "custom games need 'payoff' or 'payoff_csv'");
      }
      try {
        rc.matrix.validate();
      } catch (const ConfigError& e) {
        env.fail("payoff", e.what());
      }
      break;
    }
    case EnvKind::predator_prey: {
      rc.env_preset = "3a1p";
      env.read("preset", rc.env_preset);
      try {
        rc.predator_prey = envs::PredatorPreyConfig::preset(rc.env_preset);
      } catch (const ConfigError& e) {
        env.fail("preset", e.what());
      }
      auto& p = rc.predator_prey;
      env.read("num_predators", p.num_predators);
      env.read("num_prey", p.num_prey);
      env.read("num_landmarks", p.num_landmarks);
      env.read("world_half_extent", p.world_half_extent);
      env.read("predator_max_speed", p.predator_max_speed);
      env.read("prey_max_speed", p.prey_max_speed);
      env.read("predator_accel", p.predator_accel);
      env.read("prey_accel", p.prey_accel);
      env.read("view_radius", p.view_radius);
      env.read("capture_radius", p.capture_radius);
      env.read("proximity_radius", p.proximity_radius);
      env.read("landmark_radius", p.landmark_radius);
      env.read("damping", p.damping);
      env.read("dt", p.dt);
      env.read("step_limit", p.step_limit);
      env.read("cooperative_reward", p.cooperative_reward);
      env.read("isolated_penalty", p.isolated_penalty);
      env.read("random_prey", p.random_prey);
      try {
        p.validate();
      } catch (const ConfigError& e) {
        env.fail("preset", e.what());
      }
      break;
    }
    case EnvKind::tabular_mdp: {
      rc.env_preset = "random";
      env.read("preset", rc.env_preset);
      if (rc.env_preset != "random") env.fail("preset", "tabular MDPs only support the 'random' preset");
      auto& t = rc.tabular;
      env.read("num_states", t.num_states);
      env.read("num_agents", t.num_agents);
      env.read("num_actions", t.num_actions);
      env.read("gamma", t.gamma);
      env.read("step_limit", t.step_limit);
      env.read("mdp_seed", t.mdp_seed);
      if (t.num_states < 1 || t.num_agents < 1 || t.num_actions < 1 || t.step_limit < 1) {
        env.fail("num_states", "tabular sizes and step limit must be positive");
      }
      if (!(t.gamma >= 0.0 && t.gamma < 1.0)) env.fail("gamma", "must lie in [0, 1)");
      rc.trainer.trace.gamma = t.gamma;
      break;
    }
  }
  env.reject_unknown();

  auto& c = rc.trainer;
  SectionReader tr(tree.section("trainer"), "trainer");
  tr.read("iterations", c.iterations);
  tr.read("episodes_per_iter", c.episodes_per_iter);
  tr.read("batch_size", c.batch_size);
  tr.read("rho", c.rho);
  tr.read("elite_samples", c.elite_samples);
  tr.read("lambda", c.trace.lambda);
  tr.read("horizon", c.trace.horizon);
  tr.read("gamma", c.trace.gamma);
  tr.read("entropy_coeff", c.entropy_coeff);
  tr.read("actor_lr", c.actor_lr);
  tr.read("critic_lr", c.critic_lr);
  tr.read("grad_clip", c.grad_clip);
  tr.read("target_sync", c.target_sync);
  tr.read("eval_period", c.eval_period);
  tr.read("eval_episodes", c.eval_episodes);
  tr.read("buffer_capacity", c.buffer_capacity);
  tr.read("next_action_samples", c.next_action_samples);
  tr.read("sample_from_proposal", c.sample_from_proposal);
  tr.read("log_seconds", c.log_seconds);
  tr.read("checkpoint_period", rc.checkpoint_period);
  tr.reject_unknown();
  if (rc.checkpoint_period < 0) tr.fail("checkpoint_period", "must be >= 0");

  SectionReader var(tree.section("variant"), "variant");
  if (auto m = var.text("mixer")) {
    if (*m != "ncd" && *m != "linear") var.fail("mixer", "expected ncd or linear, got '" + *m + "'");
    c.mixer = critic::parse_mixer_mode(*m);
  }
  if (auto t = var.text("trace")) {
    if (*t != "retrace" && *t != "tb" && *t != "is") var.fail("trace", "expected retrace, tb or is, got '" + *t + "'");
    c.trace.variant = critic::parse_trace_variant(*t);
  }
  var.read("on_policy", c.on_policy);
  var.reject_unknown();

  SectionReader net(tree.section("network"), "network");
  net.read("hidden", c.hidden_sizes);
  if (auto a = net.text("activation")) {
    try {
      c.activation = approx::parse_activation(*a);
    } catch (const ConfigError& e) {
      net.fail("activation", e.what());
    }
  }
  net.read("recurrent", c.recurrent);
  net.read("gru_hidden", c.gru_hidden);
  net.read("input_window", c.input_window);
  net.read("prev_action", c.prev_action_input);
  net.read("agent_id", c.agent_id_input);
  net.read("mixer_embed", c.mixer_embed);
  net.read("hyper_hidden", c.hyper_hidden);
  net.read("sigma_min", c.sigma.min);
  net.read("sigma_max", c.sigma.max);
  net.read("squash_mean", c.squash_mean);
  net.reject_unknown();
  for (Index h : c.hidden_sizes) {
    if (h < 1) net.fail("hidden", "layer widths must be positive");
  }
  if (c.input_window < 1) net.fail("input_window", "must be >= 1");
  if (c.mixer_embed < 1 || c.hyper_hidden < 1) net.fail("mixer_embed", "mixer sizes must be positive");

  SectionReader run(tree.section("run"), "run");
  run.read("seeds", rc.seeds);
  run.reject_unknown();
  if (rc.seeds.empty()) run.fail("seeds", "need at least one seed");

  try {
    c.validate();
  } catch (const ConfigError& e) {
    const auto* s = tree.section("trainer");
    throw ConfigError((s ? s->origin : std::string("config")) + ": " + e.what());
  }
  return rc;
}

ConfigTree RunConfig::to_tree() const {
  ConfigTree t;
  const std::string es = "env." + to_string(env_kind);
  switch (env_kind) {
    case EnvKind::matrix_game: {
      t.set(es, "preset", env_preset);
      t.set(es, "num_agents", i(matrix.num_agents));
      t.set(es, "num_actions", i(matrix.num_actions));
      t.set(es, "episode_length", i(matrix.episode_length));
      std::vector<std::string> pay;
      for (Index k = 0; k < matrix.payoff.size(); ++k) pay.push_back(f(matrix.payoff(k)));
      t.set(es, "payoff", join(pay));
      break;
    }
    case EnvKind::predator_prey: {
      const auto& p = predator_prey;
      t.set(es, "preset", env_preset);
      t.set(es, "num_predators", i(p.num_predators));
      t.set(es, "num_prey", i(p.num_prey));
      t.set(es, "num_landmarks", i(p.num_landmarks));
      t.set(es, "world_half_extent", f(p.world_half_extent));
      t.set(es, "predator_max_speed", f(p.predator_max_speed));
      t.set(es, "prey_max_speed", f(p.prey_max_speed));
      t.set(es, "predator_accel", f(p.predator_accel));
      t.set(es, "prey_accel", f(p.prey_accel));
      t.set(es, "view_radius", f(p.view_radius));
      t.set(es, "capture_radius", f(p.capture_radius));
      t.set(es, "proximity_radius", f(p.proximity_radius));
      t.set(es, "landmark_radius", f(p.landmark_radius));
      t.set(es, "damping", f(p.damping));
      t.set(es, "dt", f(p.dt));
      t.set(es, "step_limit", i(p.step_limit));
      t.set(es, "cooperative_reward", f(p.cooperative_reward));
      t.set(es, "isolated_penalty", f(p.isolated_penalty));
      t.set(es, "random_prey", b(p.random_prey));
      break;
    }
    case EnvKind::tabular_mdp: {
      t.set(es, "preset", env_preset);
      t.set(es, "num_states", i(tabular.num_states));
      t.set(es, "num_agents", i(tabular.num_agents));
      t.set(es, "num_actions", i(tabular.num_actions));
      t.set(es, "gamma", f(tabular.gamma));
      t.set(es, "step_limit", i(tabular.step_limit));
      t.set(es, "mdp_seed", i(tabular.mdp_seed));
      break;
    }
  }
  const auto& c = trainer;
  t.set("trainer", "iterations", i(c.iterations));
  t.set("trainer", "episodes_per_iter", i(c.episodes_per_iter));
  t.set("trainer", "batch_size", i(c.batch_size));
  t.set("trainer", "rho", f(c.rho));
  t.set("trainer", "elite_samples", i(c.elite_samples));
  t.set("trainer", "lambda", f(c.trace.lambda));
  t.set("trainer", "horizon", i(c.trace.horizon));
  t.set("trainer", "gamma", f(c.trace.gamma));
  t.set("trainer", "entropy_coeff", f(c.entropy_coeff));
  t.set("trainer", "actor_lr", f(c.actor_lr));
  t.set("trainer", "critic_lr", f(c.critic_lr));
  t.set("trainer", "grad_clip", f(c.grad_clip));
  t.set("trainer", "target_sync", i(c.target_sync));
  t.set("trainer", "eval_period", i(c.eval_period));
  t.set("trainer", "eval_episodes", i(c.eval_episodes));
  t.set("trainer", "buffer_capacity", i(c.buffer_capacity));
  t.set("trainer", "next_action_samples", i(c.next_action_samples));
  t.set("trainer", "sample_from_proposal", b(c.sample_from_proposal));
  t.set("trainer", "log_seconds", b(c.log_seconds));
  t.set("trainer", "checkpoint_period", i(checkpoint_period));

  t.set("variant", "mixer", critic::to_string(c.mixer));
  t.set("variant", "trace", critic::to_string(c.trace.variant));
  t.set("variant", "on_policy", b(c.on_policy));

  std::vector<std::string> hidden;
  for (Index h : c.hidden_sizes) hidden.push_back(i(h));
  t.set("network", "hidden", join(hidden));
  t.set("network", "activation", approx::to_string(c.activation));
  t.set("network", "recurrent", b(c.recurrent));
  t.set("network", "gru_hidden", i(c.gru_hidden));
  t.set("network", "input_window", i(c.input_window));
  t.set("network", "prev_action", b(c.prev_action_input));
  t.set("network", "agent_id", b(c.agent_id_input));
  t.set("network", "mixer_embed", i(c.mixer_embed));
  t.set("network", "hyper_hidden", i(c.hyper_hidden));
  t.set("network", "sigma_min", f(c.sigma.min));
  t.set("network", "sigma_max", f(c.sigma.max));
  t.set("network", "squash_mean", b(c.squash_mean));

  std::vector<std::string> seeds_text;
  for (auto s : seeds) seeds_text.push_back(i(s));
  t.set("run", "seeds", join(seeds_text));
  return t;
}

std::unique_ptr<envs::Environment> RunConfig::make_env() const {
  switch (env_kind) {
    case EnvKind::matrix_game: return std::make_unique<envs::MatrixGame>(matrix);
    case EnvKind::predator_prey: return std::make_unique<envs::PredatorPrey>(predator_prey);
    case EnvKind::tabular_mdp: {
      Rng rng = make_rng(tabular.mdp_seed, 0x7ab);
      auto mdp = envs::TabularMDPConfig::random(tabular.num_states, tabular.num_agents, tabular.num_actions,
                                                tabular.gamma, rng);
      mdp.step_limit = tabular.step_limit;
      return std::make_unique<envs::TabularMDP>(std::move(mdp));
    }
  }
  throw ConfigError("unknown environment kind");
}

}  // namespace mcem::cli

#include "mcem/trainer/learner.hpp"

#include "mcem/approx/tensor_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mcem::trainer {

namespace {

enum Stream : std::uint64_t { kCollect = 1, kTrain = 2, kEval = 3, kPolicy = 100, kCritic = 200, kMixer = 300 };

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return make_rng(seed, stream)(); }

std::string rng_text(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Mat text_tensor(const std::string& s) {
  Mat m(1, static_cast<Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) m(0, static_cast<Index>(i)) = static_cast<unsigned char>(s[i]);
  return m;
}

std::string tensor_text(const Mat& m) {
  std::string s(static_cast<std::size_t>(m.size()), '\0');
  for (Index i = 0; i < m.size(); ++i) s[static_cast<std::size_t>(i)] = static_cast<char>(static_cast<int>(m(i)));
  return s;
}

void restore_rng(Rng& rng, const approx::TensorList& tensors, const std::string& name) {
  const Mat* m = approx::find_tensor(tensors, name);
  if (!m) throw LoadError("checkpoint is missing '" + name + "'");
  std::istringstream is(tensor_text(*m));
  Rng r;
  is >> r;
  if (!is) throw LoadError("checkpoint rng state '" + name + "' is malformed");
  rng = r;
}

void clip_global_norm(const std::vector<approx::ParamStore*>& stores, Scalar max_norm) {
  if (max_norm <= 0.0) return;
  Scalar sq = 0.0;
  for (const auto* s : stores) {
    for (const auto& [name, e] : s->entries()) sq += e.grad.squaredNorm();
  }
  const Scalar norm = std::sqrt(sq);
  if (!(norm > max_norm)) return;
  const Scalar scale = max_norm / norm;
  for (auto* s : stores) {
    for (auto& [name, e] : s->entries()) e.grad *= scale;
  }
}

std::string fmt(Scalar v) {
  // Shortest representation that round-trips.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 0) throw ConfigError("trainer.iterations must be >= 0");
  if (episodes_per_iter < 0) throw ConfigError("trainer.episodes_per_iter must be >= 0");
  if (batch_size < 1) throw ConfigError("trainer.batch_size must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("trainer.rho must lie in (0, 1)");
  if (elite_samples < 1) throw ConfigError("trainer.elite_samples must be >= 1");
  if (!(entropy_coeff >= 0.0)) throw ConfigError("trainer.entropy_coeff must be >= 0");
  if (!(actor_lr >= 0.0 && critic_lr >= 0.0)) throw ConfigError("learning rates must be >= 0");
  if (target_sync < 1) throw ConfigError("trainer.target_sync must be >= 1");
  if (eval_period < 0 || eval_episodes < 1) throw ConfigError("evaluation period >= 0 and episodes >= 1 required");
  if (buffer_capacity < 1) throw ConfigError("trainer.buffer_capacity must be >= 1");
  if (next_action_samples < 1) throw ConfigError("trainer.next_action_samples must be >= 1");
  if (hidden_sizes.empty()) throw ConfigError("network.hidden must list at least one layer");
  if (recurrent && gru_hidden < 1) throw ConfigError("network.gru_hidden must be >= 1");
  if (!(sigma.min > 0.0 && sigma.max > sigma.min)) throw ConfigError("policy sigma bounds must satisfy 0 < min < max");
  trace.validate();
}

std::string format_metrics_row(const MetricsRow& r) {
  return std::to_string(r.iteration) + "," + std::to_string(r.env_steps) + "," + fmt(r.return_mean) + "," +
         fmt(r.success_rate) + "," + fmt(r.critic_loss) + "," + fmt(r.entropy_main) + "," + fmt(r.entropy_prop) +
         "," + fmt(r.seconds);
}

replay::Episode run_episode(envs::Environment& env, const std::vector<const policy::StochasticPolicy*>& policies,
                            const InputLayout& layout, Rng& rng, EvalMode mode) {
  const envs::EnvSpec& spec = env.spec();
  const auto k = static_cast<std::size_t>(spec.num_agents);
  if (policies.size() != k) throw UsageError("one policy per agent required");
  envs::Observation obs = env.reset(rng);
  std::vector<InputHistory> hist;
  std::vector<Vec> hidden(k);
  for (std::size_t a = 0; a < k; ++a) hist.emplace_back(layout, static_cast<int>(a), spec.action_low, spec.action_high);

  replay::Episode ep;
  const JointAction* prev = nullptr;
  for (int t = 0; t < spec.step_limit; ++t) {
    replay::EpisodeStep step;
    step.state = obs.state;
    step.observations = obs.observations;
    for (std::size_t a = 0; a < k; ++a) {
      const Vec in = hist[a].push(obs.observations[a], prev ? &(*prev)[a] : nullptr);
      const Vec enc = policies[a]->encode_step(in, hidden[a]);
      const policy::ActionDist d = policies[a]->distribution(enc);
      if (mode == EvalMode::greedy) {
        Vec u = d.greedy();
        step.behavior_logprob.push_back(d.log_prob(u));
        step.actions.push_back(std::move(u));
      } else {
        auto [u, lp] = d.sample(rng);
        step.actions.push_back(std::move(u));
        step.behavior_logprob.push_back(lp);
      }
    }
    envs::StepResult r = env.step(step.actions);
    step.reward = r.reward;
    step.terminal = r.terminal;
    ep.steps.push_back(std::move(step));
    prev = &ep.steps.back().actions;
    obs.observations = std::move(r.observations);
    obs.state = std::move(r.state);
    if (ep.steps.back().terminal) break;
  }
  ep.final_observations = std::move(obs.observations);
  ep.final_state = std::move(obs.state);
  return ep;
}

EvalResult evaluate(envs::Environment& env, const std::vector<const policy::StochasticPolicy*>& policies,
                    const InputLayout& layout, int episodes, Rng& rng, EvalMode mode) {
  if (episodes < 1) throw UsageError("evaluation needs at least one episode");
  EvalResult out;
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    const replay::Episode ep = run_episode(env, policies, layout, rng, mode);
    out.returns.push_back(ep.total_reward());
    if (env.episode_success()) ++successes;
  }
  const auto n = static_cast<Scalar>(episodes);
  Scalar sum = 0.0;
  for (Scalar r : out.returns) sum += r;
  out.return_mean = sum / n;
  if (episodes > 1) {
    Scalar ss = 0.0;
    for (Scalar r : out.returns) ss += (r - out.return_mean) * (r - out.return_mean);
    out.return_stderr = std::sqrt(ss / (n - 1.0) / n);
  }
  out.success_rate = env.success_defined() ? successes / n : std::numeric_limits<Scalar>::quiet_NaN();
  return out;
}

struct Learner::BatchItem {
  std::vector<Mat> inputs;   // per agent, input x T (T + 1 columns before trimming)
  std::vector<Mat> actions;  // per agent, action x T
  Mat states;                // state x (T + 1)
  Index steps = 0;
};

Learner::Learner(const envs::Environment& env, TrainConfig config)
    : config_(std::move(config)),
      env_(env.clone()),
      eval_env_(env.clone()),
      buffer_(config_.on_policy ? static_cast<std::size_t>(std::max(1, config_.episodes_per_iter))
                                : config_.buffer_capacity),
      start_(std::chrono::steady_clock::now()) {
  config_.validate();
  const envs::EnvSpec& spec = env_->spec();
  spec.validate();
  layout_ = InputLayout::from_env(spec, config_.input_window, config_.prev_action_input, config_.agent_id_input);
  trace_ = config_.trace;
  if (config_.on_policy) trace_.variant = critic::TraceVariant::sarsa;

  approx::NetSpec body;
  body.layer_sizes.push_back(layout_.input_size());
  for (Index h : config_.hidden_sizes) body.layer_sizes.push_back(h);
  body.layer_sizes.push_back(1);
  body.activation = config_.activation;
  body.recurrent = config_.recurrent;
  body.hidden_size = config_.recurrent ? config_.gru_hidden : 0;

  const auto kind = spec.discrete ? policy::HeadKind::categorical : policy::HeadKind::gaussian;
  policy::GaussianBounds head_bounds = config_.sigma;
  if (!spec.discrete && config_.squash_mean) {
    head_bounds.mean_low = spec.action_low;
    head_bounds.mean_high = spec.action_high;
  }
  for (int a = 0; a < spec.num_agents; ++a) {
    const auto ua = static_cast<std::uint64_t>(a);
    pairs_.push_back(policy::make_policy_pair(kind, spec.action_size(), body, derive_seed(config_.seed, kPolicy + ua),
                                              config_.entropy_coeff, head_bounds));
    std::optional<critic::AgentCritic::ActionBox> box;
    if (!spec.discrete) box = critic::AgentCritic::ActionBox{spec.action_low, spec.action_high};
    critics_.emplace_back(spec.discrete, spec.action_size(), body, derive_seed(config_.seed, kCritic + ua), box);
  }
  target_critics_ = critics_;

  critic::MixerConfig mc;
  mc.mode = config_.mixer;
  mc.num_agents = spec.num_agents;
  mc.state_dim = spec.state_dim;
  mc.embed_dim = config_.mixer_embed;
  mc.hyper_hidden = config_.hyper_hidden;
  mixer_ = critic::Mixer(mc, derive_seed(config_.seed, kMixer));
  target_mixer_ = mixer_;

  approx::OptimState actor;
  actor.learning_rate = config_.actor_lr;
  approx::OptimState crit;
  crit.learning_rate = config_.critic_lr;
  opt_main_.assign(pairs_.size(), actor);
  opt_prop_.assign(pairs_.size(), actor);
  opt_critic_.assign(pairs_.size(), crit);
  opt_mixer_ = crit;

  collect_rng_ = make_rng(config_.seed, kCollect);
  train_rng_ = make_rng(config_.seed, kTrain);
  eval_rng_ = make_rng(config_.seed, kEval);
}

Learner::Learner(const Learner& other)
    : config_(other.config_),
      env_(other.env_->clone()),
      eval_env_(other.eval_env_->clone()),
      layout_(other.layout_),
      trace_(other.trace_),
      pairs_(other.pairs_),
      critics_(other.critics_),
      target_critics_(other.target_critics_),
      mixer_(other.mixer_),
      target_mixer_(other.target_mixer_),
      opt_main_(other.opt_main_),
      opt_prop_(other.opt_prop_),
      opt_critic_(other.opt_critic_),
      opt_mixer_(other.opt_mixer_),
      buffer_(other.buffer_),
      collect_rng_(other.collect_rng_),
      train_rng_(other.train_rng_),
      eval_rng_(other.eval_rng_),
      iteration_(other.iteration_),
      env_steps_(other.env_steps_),
      last_eval_iteration_(other.last_eval_iteration_),
      last_greedy_(other.last_greedy_),
      last_stochastic_(other.last_stochastic_),
      trace_stats_(other.trace_stats_),
      start_(other.start_),
      call_log_(other.call_log_) {}

Learner& Learner::operator=(const Learner& other) {
  if (this != &other) *this = Learner(other);
  return *this;
}

std::vector<const policy::StochasticPolicy*> Learner::main_policies() const {
  std::vector<const policy::StochasticPolicy*> out;
  for (const auto& p : pairs_) out.push_back(&p.main);
  return out;
}

std::size_t Learner::collect(int episodes) {
  log("collect");
  std::size_t steps = 0;
  const auto acting = main_policies();
  for (int e = 0; e < episodes; ++e) {
    replay::Episode ep = run_episode(*env_, acting, layout_, collect_rng_, EvalMode::stochastic);
    steps += ep.length();
    buffer_.append_episode(std::move(ep));
  }
  env_steps_ += static_cast<std::int64_t>(steps);
  return steps;
}

Learner::BatchItem Learner::prepare(const replay::Episode& episode) {
  BatchItem item;
  item.steps = static_cast<Index>(episode.length());
  const envs::EnvSpec& spec = env_->spec();
  for (int a = 0; a < spec.num_agents; ++a) {
    item.inputs.push_back(episode_inputs(layout_, episode, a, spec.action_low, spec.action_high));
    item.actions.push_back(episode_actions(episode, a));
  }
  item.states = episode_states(episode);
  return item;
}

MetricsRow Learner::train_iteration() {
  MetricsRow row;
  row.iteration = iteration_;
  row.env_steps = env_steps_;
  if (buffer_.empty()) {
    row.skipped = true;
    row.critic_loss = std::numeric_limits<Scalar>::quiet_NaN();
    return row;
  }
  const auto k = pairs_.size();
  const auto batch = buffer_.sample_batch(static_cast<std::size_t>(config_.batch_size), train_rng_);
  std::vector<BatchItem> items;
  for (const auto& ep : batch) items.push_back(prepare(*ep));

  // Critic targets from the target networks and the current main policies.
  log("critic_update");
  std::vector<critic::CriticSequence> seqs;
  for (std::size_t b = 0; b < items.size(); ++b) {
    const BatchItem& it = items[b];
    const replay::Episode& ep = *batch[b];
    const Index T = it.steps;
    std::vector<Mat> t_enc(k), p_enc(k);
    Mat q_local(static_cast<Index>(k), T + 1);
    q_local.col(T).setZero();
    for (std::size_t a = 0; a < k; ++a) {
      t_enc[a] = target_critics_[a].encode(it.inputs[a]);
      p_enc[a] = pairs_[a].main.encode(it.inputs[a]);
      q_local.row(static_cast<Index>(a)).head(T) =
          target_critics_[a].q_sequence(t_enc[a].leftCols(T), it.actions[a]).transpose();
    }
    const critic::Mixer::Conditioning cond = target_mixer_.condition(it.states);
    const Vec q_taken = target_mixer_.mix_steps(cond, q_local);

    Vec q_next = Vec::Zero(T + 1);  // q_next(t + 1) belongs to anchor t
    for (int m = 0; m < config_.next_action_samples; ++m) {
      Mat q_sampled(static_cast<Index>(k), T + 1);
      q_sampled.col(0).setZero();
      for (std::size_t a = 0; a < k; ++a) {
        const Index rows = it.actions[a].rows();
        Mat next_actions(rows, T + 1);
        next_actions.col(0).setZero();
        for (Index t = 1; t <= T; ++t) {
          next_actions.col(t) = pairs_[a].main.distribution(p_enc[a].col(t)).sample(train_rng_).first;
        }
        q_sampled.row(static_cast<Index>(a)).tail(T) =
            target_critics_[a].q_sequence(t_enc[a].rightCols(T), next_actions.rightCols(T)).transpose();
      }
      q_next += target_mixer_.mix_steps(cond, q_sampled);
    }
    q_next /= static_cast<Scalar>(config_.next_action_samples);

    std::vector<critic::StepTerms> terms(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
      const replay::EpisodeStep& s = ep.steps[static_cast<std::size_t>(t)];
      critic::StepTerms& st = terms[static_cast<std::size_t>(t)];
      st.q_taken = q_taken(t);
      st.q_next = q_next(t + 1);
      st.reward = s.reward;
      st.terminal = s.terminal;
      for (std::size_t a = 0; a < k; ++a) {
        st.joint_logpi += pairs_[a].main.distribution(p_enc[a].col(t)).log_prob(s.actions[a]);
        st.joint_logbeta += s.behavior_logprob[a];
      }
      st.joint_pi_prob = std::exp(st.joint_logpi);
    }
    const std::vector<Scalar> targets = critic::retrace_targets(terms, trace_, &trace_stats_);

    critic::CriticSequence seq;
    for (std::size_t a = 0; a < k; ++a) {
      seq.agent_inputs.push_back(it.inputs[a].leftCols(T));
      seq.actions.push_back(it.actions[a]);
    }
    seq.states = it.states.leftCols(T);
    seq.targets = Eigen::Map<const Vec>(targets.data(), T);
    seqs.push_back(std::move(seq));
  }
  const critic::LossResult loss = critic::critic_loss(seqs, critics_, mixer_, true);
  row.critic_loss = loss.loss;
  {
    std::vector<approx::ParamStore*> stores{&mixer_.params()};
    for (auto& c : critics_) stores.push_back(&c.params());
    clip_global_norm(stores, config_.grad_clip);
    for (std::size_t a = 0; a < k; ++a) approx::adam_update(critics_[a].params(), opt_critic_[a]);
    approx::adam_update(mixer_.params(), opt_mixer_);
  }

  // MCEM elite selection over every record with the updated critics.
  log("policy_update");
  Index records = 0;
  for (const auto& it : items) records += it.steps;
  const Scalar inv_records = records > 0 ? 1.0 / static_cast<Scalar>(records) : 0.0;
  Scalar ent_main = 0.0;
  Scalar ent_prop = 0.0;
  for (const BatchItem& it : items) {
    const Index T = it.steps;
    if (T == 0) continue;
    std::vector<approx::Network::EncodeTrace> tr_main(k), tr_prop(k);
    std::vector<Mat> e_main(k), e_prop(k), e_crit(k), d_main(k), d_prop(k);
    for (std::size_t a = 0; a < k; ++a) {
      const Mat in = it.inputs[a].leftCols(T);
      e_main[a] = pairs_[a].main.encode(in, &tr_main[a]);
      e_prop[a] = pairs_[a].proposal.encode(in, &tr_prop[a]);
      e_crit[a] = critics_[a].encode(in);
      d_main[a] = Mat::Zero(pairs_[a].main.raw_size(), T);
      d_prop[a] = Mat::Zero(pairs_[a].proposal.raw_size(), T);
    }
    const critic::Mixer::Conditioning cond = mixer_.condition(it.states.leftCols(T));
    for (Index t = 0; t < T; ++t) {
      std::vector<policy::ActionDist> dm, dp;
      for (std::size_t a = 0; a < k; ++a) {
        dm.push_back(pairs_[a].main.distribution(e_main[a].col(t)));
        dp.push_back(pairs_[a].proposal.distribution(e_prop[a].col(t)));
        ent_main += dm.back().entropy();
        ent_prop += dp.back().entropy();
      }
      const policy::QEvaluator q_eval = [&](std::span<const JointAction> cands) {
        Mat qs(static_cast<Index>(k), static_cast<Index>(cands.size()));
        std::vector<Vec> acts(cands.size());
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t i = 0; i < cands.size(); ++i) acts[i] = cands[i][a];
          qs.row(static_cast<Index>(a)) = critics_[a].q_batch(e_crit[a].col(t), acts).transpose();
        }
        return mixer_.mix_at(cond, t, qs);
      };
      const auto& sampling = config_.sample_from_proposal ? dp : dm;
      const policy::EliteSet elites = policy::mcem_elites(sampling, q_eval, static_cast<std::size_t>(config_.elite_samples),
                                                          config_.rho, train_rng_);
      const auto gm = policy::main_policy_raw_gradient(dm, elites);
      const auto gp = policy::proposal_policy_raw_gradient(dp, elites, config_.entropy_coeff);
      for (std::size_t a = 0; a < k; ++a) {
        d_main[a].col(t) = gm[a] * inv_records;
        d_prop[a].col(t) = gp[a] * inv_records;
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      const Mat dm_enc = pairs_[a].main.backprop_head(e_main[a], d_main[a]);
      pairs_[a].main.backprop_encoder(tr_main[a], dm_enc);
      const Mat dp_enc = pairs_[a].proposal.backprop_head(e_prop[a], d_prop[a]);
      pairs_[a].proposal.backprop_encoder(tr_prop[a], dp_enc);
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    approx::adam_update(pairs_[a].main.params(), opt_main_[a], true);
    approx::adam_update(pairs_[a].proposal.params(), opt_prop_[a], true);
  }
  const Scalar denom = static_cast<Scalar>(records) * static_cast<Scalar>(k);
  row.entropy_main = records > 0 ? ent_main / denom : 0.0;
  row.entropy_prop = records > 0 ? ent_prop / denom : 0.0;

  for (const auto& p : pairs_) {
    if (!p.main.params().all_finite() || !p.proposal.params().all_finite()) {
      throw NumericalError("policy parameters became non-finite at iteration " + std::to_string(iteration_ + 1));
    }
  }
  if (!mixer_.params().all_finite()) throw NumericalError("mixer parameters became non-finite");
  return row;
}

void Learner::sync_targets() {
  log("target_sync");
  for (std::size_t a = 0; a < critics_.size(); ++a) target_critics_[a].params().copy_values_from(critics_[a].params());
  target_mixer_.params().copy_values_from(mixer_.params());
}

EvalResult Learner::evaluate(int episodes, EvalMode mode) {
  return trainer::evaluate(*eval_env_, main_policies(), layout_, episodes, eval_rng_, mode);
}

MetricsRow Learner::step() {
  collect(config_.episodes_per_iter);
  MetricsRow row = train_iteration();
  ++iteration_;
  if (iteration_ % config_.target_sync == 0) sync_targets();
  if (config_.eval_period > 0 && (iteration_ == 1 || iteration_ % config_.eval_period == 0)) {
    log("evaluate");
    last_greedy_ = evaluate(config_.eval_episodes, EvalMode::greedy);
    last_stochastic_ = evaluate(config_.eval_episodes, EvalMode::stochastic);
    last_eval_iteration_ = iteration_;
  }
  row.iteration = iteration_;
  row.env_steps = env_steps_;
  row.return_mean = last_greedy_.return_mean;
  row.success_rate = last_greedy_.success_rate;
  if (config_.log_seconds) {
    row.seconds = std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - start_).count();
  }
  return row;
}

approx::TensorList Learner::state_tensors() const {
  approx::TensorList out;
  Mat counters(1, 8);
  counters << static_cast<Scalar>(iteration_), static_cast<Scalar>(env_steps_), last_greedy_.return_mean,
      last_greedy_.success_rate, last_stochastic_.return_mean, last_stochastic_.success_rate,
      static_cast<Scalar>(trace_stats_.clamped), static_cast<Scalar>(last_eval_iteration_);
  out.emplace_back("#counters", counters);
  for (std::size_t a = 0; a < pairs_.size(); ++a) {
    const std::string p = "agent" + std::to_string(a) + "/";
    approx::append_params(out, pairs_[a].main.params(), p + "main/");
    approx::append_params(out, pairs_[a].proposal.params(), p + "proposal/");
    approx::append_params(out, critics_[a].params(), p + "critic/");
    approx::append_params(out, target_critics_[a].params(), p + "target_critic/");
    approx::append_optim(out, opt_main_[a], p + "opt_main/");
    approx::append_optim(out, opt_prop_[a], p + "opt_proposal/");
    approx::append_optim(out, opt_critic_[a], p + "opt_critic/");
  }
  approx::append_params(out, mixer_.params(), "mixer/");
  approx::append_params(out, target_mixer_.params(), "target_mixer/");
  approx::append_optim(out, opt_mixer_, "opt_mixer/");
  out.emplace_back("#rng/collect", text_tensor(rng_text(collect_rng_)));
  out.emplace_back("#rng/train", text_tensor(rng_text(train_rng_)));
  out.emplace_back("#rng/eval", text_tensor(rng_text(eval_rng_)));
  buffer_.append_tensors(out, "replay/");
  return out;
}

void Learner::restore_state(const approx::TensorList& tensors) {
  Learner next(*this);
  const Mat* counters = approx::find_tensor(tensors, "#counters");
  if (!counters || counters->size() != 8) throw LoadError("checkpoint is missing learner counters");
  for (std::size_t a = 0; a < next.pairs_.size(); ++a) {
    const std::string p = "agent" + std::to_string(a) + "/";
    approx::assign_params(next.pairs_[a].main.params(), tensors, p + "main/");
    approx::assign_params(next.pairs_[a].proposal.params(), tensors, p + "proposal/");
    approx::assign_params(next.critics_[a].params(), tensors, p + "critic/");
    approx::assign_params(next.target_critics_[a].params(), tensors, p + "target_critic/");
    approx::assign_optim(next.opt_main_[a], tensors, p + "opt_main/");
    approx::assign_optim(next.opt_prop_[a], tensors, p + "opt_proposal/");
    approx::assign_optim(next.opt_critic_[a], tensors, p + "opt_critic/");
  }
  approx::assign_params(next.mixer_.params(), tensors, "mixer/");
  approx::assign_params(next.target_mixer_.params(), tensors, "target_mixer/");
  approx::assign_optim(next.opt_mixer_, tensors, "opt_mixer/");
  restore_rng(next.collect_rng_, tensors, "#rng/collect");
  restore_rng(next.train_rng_, tensors, "#rng/train");
  restore_rng(next.eval_rng_, tensors, "#rng/eval");
  next.buffer_.restore_tensors(tensors, "replay/");
  for (std::size_t a = 0; a < next.pairs_.size(); ++a) {
    next.pairs_[a].main.params().step_count = next.opt_main_[a].steps;
    next.pairs_[a].proposal.params().step_count = next.opt_prop_[a].steps;
    next.critics_[a].params().step_count = next.opt_critic_[a].steps;
  }
  next.mixer_.params().step_count = next.opt_mixer_.steps;
  const Mat& c = *counters;
  next.iteration_ = static_cast<std::int64_t>(c(0));
  next.env_steps_ = static_cast<std::int64_t>(c(1));
  next.last_greedy_ = EvalResult{c(2), 0.0, c(3), {}};
  next.last_stochastic_ = EvalResult{c(4), 0.0, c(5), {}};
  next.trace_stats_.clamped = static_cast<std::uint64_t>(c(6));
  next.last_eval_iteration_ = static_cast<std::int64_t>(c(7));
  *this = std::move(next);
}

void Learner::save_checkpoint(const std::filesystem::path& path) const { approx::save_tensors(path, state_tensors()); }

void Learner::load_checkpoint(const std::filesystem::path& path) { restore_state(approx::load_tensors(path)); }

}  // namespace mcem::trainer

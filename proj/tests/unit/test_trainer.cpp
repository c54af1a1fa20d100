#include "doctest.h"

#include "mcem/approx/tensor_io.hpp"
#include "mcem/envs/matrix_game.hpp"
#include "mcem/envs/predator_prey.hpp"
#include "mcem/envs/tabular_mdp.hpp"
#include "mcem/trainer/learner.hpp"

#include <filesystem>

using namespace mcem;
using namespace mcem::trainer;

namespace {

TrainConfig small_config(std::uint64_t seed = 3) {
  TrainConfig c;
  c.seed = seed;
  c.hidden_sizes = {16};
  c.mixer_embed = 8;
  c.hyper_hidden = 16;
  c.batch_size = 4;
  c.eval_period = 2;
  c.eval_episodes = 3;
  c.target_sync = 3;
  c.actor_lr = 1e-2;
  c.critic_lr = 1e-2;
  return c;
}

envs::PredatorPrey small_pp() {
  envs::PredatorPreyConfig c;
  c.step_limit = 6;
  return envs::PredatorPrey(c);
}

bool same_tensors(const approx::TensorList& a, const approx::TensorList& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first || a[i].second.rows() != b[i].second.rows() ||
        a[i].second.cols() != b[i].second.cols()) {
      return false;
    }
    for (Index j = 0; j < a[i].second.size(); ++j) {
      const Scalar x = a[i].second(j), y = b[i].second(j);
      if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
    }
  }
  return true;
}

bool same_episode(const replay::Episode& a, const replay::Episode& b) {
  if (a.length() != b.length()) return false;
  for (std::size_t t = 0; t < a.length(); ++t) {
    if (a.steps[t].actions != b.steps[t].actions || a.steps[t].reward != b.steps[t].reward ||
        a.steps[t].behavior_logprob != b.steps[t].behavior_logprob || a.steps[t].state != b.steps[t].state) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig c;
  c.rho = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.trace.lambda = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("fixed seed reproduces the run exactly") {
  for (bool recurrent : {false, true}) {
    TrainConfig c = small_config();
    c.recurrent = recurrent;
    c.gru_hidden = 8;
    Learner a(small_pp(), c), b(small_pp(), c);
    for (int i = 0; i < 4; ++i) {
      const MetricsRow ra = a.step(), rb = b.step();
      CHECK(format_metrics_row(ra) == format_metrics_row(rb));
    }
    CHECK(same_tensors(a.state_tensors(), b.state_tensors()));
  }
}

TEST_CASE("different seeds give different runs") {
  Learner a(small_pp(), small_config(1)), b(small_pp(), small_config(2));
  a.step();
  b.step();
  CHECK_FALSE(same_tensors(a.state_tensors(), b.state_tensors()));
}

TEST_CASE("zero learning rates leave every network unchanged") {
  TrainConfig c = small_config();
  c.actor_lr = 0.0;
  c.critic_lr = 0.0;
  Learner l(small_pp(), c);
  const Learner before = l;
  for (int i = 0; i < 4; ++i) l.step();
  for (std::size_t a = 0; a < l.policies().size(); ++a) {
    CHECK(approx::identical(l.policies()[a].main.params(), before.policies()[a].main.params()));
    CHECK(approx::identical(l.policies()[a].proposal.params(), before.policies()[a].proposal.params()));
    CHECK(approx::identical(l.critics()[a].params(), before.critics()[a].params()));
  }
  CHECK(approx::identical(l.mixer().params(), before.mixer().params()));
  CHECK(l.iteration() == 4);
  CHECK(l.env_steps() == 4 * 6);
}

TEST_CASE("training changes the networks") {
  Learner l(small_pp(), small_config());
  const Learner before = l;
  l.step();
  CHECK_FALSE(approx::identical(l.policies()[0].main.params(), before.policies()[0].main.params()));
  CHECK_FALSE(approx::identical(l.critics()[0].params(), before.critics()[0].params()));
  CHECK_FALSE(approx::identical(l.mixer().params(), before.mixer().params()));
}

TEST_CASE("checkpoint then continue matches the uninterrupted run") {
  const auto path = std::filesystem::temp_directory_path() / "mcem_trainer_resume.ckpt";
  TrainConfig c = small_config();
  Learner full(small_pp(), c);
  for (int i = 0; i < 6; ++i) full.step();

  Learner first(small_pp(), c);
  for (int i = 0; i < 3; ++i) first.step();
  first.save_checkpoint(path);
  Learner resumed(small_pp(), c);
  resumed.load_checkpoint(path);
  CHECK(same_tensors(first.state_tensors(), resumed.state_tensors()));
  for (int i = 0; i < 3; ++i) resumed.step();
  CHECK(same_tensors(full.state_tensors(), resumed.state_tensors()));
  std::filesystem::remove(path);
}

TEST_CASE("restore leaves the learner untouched when the tensors are incompatible") {
  Learner l(small_pp(), small_config());
  l.step();
  const auto saved = l.state_tensors();
  auto broken = saved;
  for (auto& [name, m] : broken) {
    if (name.find("agent1/main/") == 0) {
      m = Mat::Zero(m.rows() + 1, m.cols());
      break;
    }
  }
  CHECK_THROWS_AS(l.restore_state(broken), LoadError);
  CHECK(same_tensors(l.state_tensors(), saved));

  envs::PredatorPreyConfig six = envs::PredatorPreyConfig::preset("6a2p");
  Learner other(envs::PredatorPrey(six), small_config());
  CHECK_THROWS_AS(other.restore_state(saved), LoadError);
}

TEST_CASE("iteration phases run in order") {
  TrainConfig c = small_config();
  c.target_sync = 2;
  c.eval_period = 3;
  Learner l(small_pp(), c);
  std::vector<std::string> calls;
  l.set_call_log([&](const std::string& e) { calls.push_back(e); });
  for (int i = 0; i < 3; ++i) l.step();
  const std::vector<std::string> expected{"collect",      "critic_update", "policy_update", "evaluate",
                                          "collect",      "critic_update", "policy_update", "target_sync",
                                          "collect",      "critic_update", "policy_update", "evaluate"};
  CHECK(calls == expected);
}

TEST_CASE("ablation flags do not change the first collect") {
  TrainConfig base = small_config();
  TrainConfig linear = base, on_policy = base, tb = base;
  linear.mixer = critic::MixerMode::linear;
  on_policy.on_policy = true;
  tb.trace.variant = critic::TraceVariant::tree_backup;
  Learner lb(small_pp(), base);
  lb.collect(1);
  for (const TrainConfig& v : {linear, on_policy, tb}) {
    Learner lv(small_pp(), v);
    lv.collect(1);
    CHECK(same_episode(lb.buffer().newest(), lv.buffer().newest()));
  }
}

TEST_CASE("on-policy variant keeps only the current iteration's episodes") {
  TrainConfig c = small_config();
  c.on_policy = true;
  c.episodes_per_iter = 2;
  Learner l(small_pp(), c);
  for (int i = 0; i < 3; ++i) l.step();
  CHECK(l.buffer().capacity() == 2);
  CHECK(l.buffer().size() == 2);
}

TEST_CASE("stored behavior log-probabilities match the acting policy") {
  for (bool recurrent : {false, true}) {
    TrainConfig c = small_config();
    c.recurrent = recurrent;
    c.gru_hidden = 8;
    c.input_window = recurrent ? 1 : 2;
    Learner l(small_pp(), c);
    l.collect(1);
    const replay::Episode& ep = l.buffer().newest();
    const auto& spec = l.env().spec();
    for (int a = 0; a < spec.num_agents; ++a) {
      const auto& pol = l.policies()[static_cast<std::size_t>(a)].main;
      const Mat inputs = episode_inputs(l.layout(), ep, a, spec.action_low, spec.action_high);
      const Mat enc = pol.encode(inputs);
      for (std::size_t t = 0; t < ep.length(); ++t) {
        const auto& st = ep.steps[t];
        const Scalar lp = pol.distribution(enc.col(static_cast<Index>(t))).log_prob(st.actions[static_cast<std::size_t>(a)]);
        CHECK(lp == doctest::Approx(st.behavior_logprob[static_cast<std::size_t>(a)]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("uniform policies on the penalty game earn the mean payoff") {
  envs::MatrixGame game(envs::MatrixGameConfig::penalty());
  TrainConfig c = small_config();
  Learner l(game, c);
  for (auto& pair : l.policies()) {
    for (auto& [name, e] : pair.main.params().entries()) e.value.setZero();
  }
  Rng rng = make_rng(8, 0);
  envs::MatrixGame env(envs::MatrixGameConfig::penalty());
  const EvalResult r = evaluate(env, l.main_policies(), l.layout(), 20000, rng, EvalMode::stochastic);
  const Scalar expected = (10.0 + 0.0 - 100.0 + 0.0 + 2.0 + 0.0 - 100.0 + 0.0 + 10.0) / 9.0;
  CHECK(std::abs(r.return_mean - expected) < 4.0 * r.return_stderr);
  CHECK(r.returns.size() == 20000);
  CHECK(r.success_rate == doctest::Approx(2.0 / 9.0).epsilon(0.05));
  const EvalResult g = evaluate(env, l.main_policies(), l.layout(), 3, rng, EvalMode::greedy);
  CHECK(g.return_mean == 10.0);
  CHECK(g.return_stderr == 0.0);
}

TEST_CASE("stochastic evaluation on a tabular mdp matches the exact finite-horizon value") {
  Rng mdp_rng = make_rng(5, 0);
  auto cfg = envs::TabularMDPConfig::random(3, 2, 2, 0.9, mdp_rng);
  cfg.step_limit = 4;
  envs::TabularMDP env(cfg);
  Learner l(env, small_config());
  for (auto& pair : l.policies()) {
    for (auto& [name, e] : pair.main.params().entries()) e.value.setZero();
  }
  // Undiscounted H-step value of the uniform joint policy, starting in state 0.
  const int J = cfg.num_joint();
  Vec v = Vec::Zero(3);
  for (int h = 0; h < cfg.step_limit; ++h) {
    Vec next(3);
    for (int s = 0; s < 3; ++s) {
      Scalar acc = 0.0;
      for (int j = 0; j < J; ++j) {
        Scalar cont = 0.0;
        for (int s2 = 0; s2 < 3; ++s2) cont += cfg.transitions(s * J + j, s2) * v(s2);
        acc += (cfg.rewards(s, j) + cont) / J;
      }
      next(s) = acc;
    }
    v = next;
  }
  Rng rng = make_rng(6, 0);
  const EvalResult r = evaluate(env, l.main_policies(), l.layout(), 40000, rng, EvalMode::stochastic);
  CHECK(std::abs(r.return_mean - v(0)) < 4.0 * r.return_stderr);
  CHECK(std::isnan(r.success_rate));
}

TEST_CASE("metrics row formatting") {
  MetricsRow r;
  r.iteration = 3;
  r.env_steps = 75;
  r.return_mean = 0.1;
  r.critic_loss = 2.5;
  CHECK(format_metrics_row(r) == "3,75,0.1,0,2.5,0,0,0");
  CHECK(std::string(kMetricsHeader) == "iter,env_steps,return_mean,success_rate,critic_loss,entropy_main,entropy_prop,seconds");
}

TEST_CASE("input history stacks the newest features first") {
  envs::MatrixGame game(envs::MatrixGameConfig::penalty());
  const InputLayout layout = InputLayout::from_env(game.spec(), 2, true, true);
  CHECK(layout.feature_size() == 1 + 3 + 2);
  CHECK(layout.input_size() == 12);
  InputHistory h(layout, 1, -1.0, 1.0);
  const Vec first = h.push(Vec::Ones(1), nullptr);
  CHECK(first(0) == 1.0);
  CHECK(first.segment(1, 3).isZero());
  CHECK(first(5) == 1.0);
  CHECK(first.tail(6).isZero());
  const Vec act = discrete_action(2);
  const Vec second = h.push(Vec::Constant(1, 0.5), &act);
  CHECK(second.tail(6) == first.head(6));
  CHECK(second(0) == 0.5);
  CHECK(second(3) == 1.0);
}

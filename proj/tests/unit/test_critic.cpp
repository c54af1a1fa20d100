#include "doctest.h"

#include "mcem/critic/loss.hpp"
#include "mcem/critic/tabular_operator.hpp"
#include "mcem/oracle/gradient_checks.hpp"
#include "mcem/oracle/oracle.hpp"

#include <cmath>

using namespace mcem;
using namespace mcem::critic;

namespace {

MixerConfig mixer_config(MixerMode mode, Index k, Index sdim) {
  MixerConfig c;
  c.mode = mode;
  c.num_agents = k;
  c.state_dim = sdim;
  c.embed_dim = 8;
  c.hyper_hidden = 16;
  return c;
}

std::vector<StepTerms> two_steps() {
  StepTerms a;
  a.q_taken = 1.0;
  a.reward = 0.5;
  a.q_next = 2.0;
  StepTerms b;
  b.q_taken = 2.0;
  b.reward = 1.0;
  b.q_next = 3.0;
  b.joint_logpi = std::log(0.5);
  b.joint_logbeta = std::log(0.25);
  b.joint_pi_prob = 0.5;
  return {a, b};
}

}  // namespace

TEST_CASE("trace coefficient laws") {
  TraceSpec s;
  s.lambda = 0.8;
  CHECK(trace_coeff(s, std::log(0.5), std::log(0.25), 0.5) == doctest::Approx(0.8));
  CHECK(trace_coeff(s, std::log(0.2), std::log(0.4), 0.2) == doctest::Approx(0.4));
  CHECK(trace_coeff(s, -3.7, -3.7, std::exp(-3.7)) == 0.8);
  s.variant = TraceVariant::tree_backup;
  CHECK(trace_coeff(s, std::log(0.2), std::log(0.9), 0.2) == doctest::Approx(0.16));
  s.variant = TraceVariant::importance_sampling;
  CHECK(trace_coeff(s, std::log(0.5), std::log(0.25), 0.5) == doctest::Approx(2.0));
  s.variant = TraceVariant::sarsa;
  CHECK(trace_coeff(s, -9.0, -1.0, std::exp(-9.0)) == 0.8);
}

TEST_CASE("behavior log-probabilities are floored and counted") {
  TraceSpec s;
  s.lambda = 1.0;
  TraceStats stats;
  const Scalar c = trace_coeff(s, -20.0, -400.0, std::exp(-20.0), &stats);
  CHECK(stats.clamped == 1);
  CHECK(c == doctest::Approx(std::exp(-20.0 - kBehaviorLogFloor)));
  CHECK_THROWS_AS(trace_coeff(s, std::nan(""), -1.0, 0.5), NumericalError);
}

TEST_CASE("n-step return on a hand-computed window") {
  TraceSpec s;
  s.lambda = 0.8;
  s.gamma = 0.9;
  const auto w = two_steps();
  CHECK(retrace_target(w, s) == doctest::Approx(3.524));
  s.variant = TraceVariant::tree_backup;
  CHECK(retrace_target(w, s) == doctest::Approx(2.912));
  s.variant = TraceVariant::importance_sampling;
  CHECK(retrace_target(w, s) == doctest::Approx(5.36));
  s.variant = TraceVariant::retrace;
  s.horizon = 1;
  CHECK(retrace_target(w, s) == doctest::Approx(2.3));
  auto term = w;
  term[0].terminal = true;
  s.horizon = 5;
  CHECK(retrace_target(term, s) == doctest::Approx(0.5));
  CHECK_THROWS_AS(retrace_target(std::span<const StepTerms>(), s), UsageError);

  const auto all = retrace_targets(w, s);
  REQUIRE(all.size() == 2);
  CHECK(all[0] == doctest::Approx(3.524));
  CHECK(all[1] == doctest::Approx(2.0 + 1.7));
}

TEST_CASE("return operator with horizon 1 is the expected sarsa backup") {
  Rng rng = make_rng(2, 0);
  const auto mdp = envs::TabularMDPConfig::random(4, 2, 2, 0.9, rng);
  const Mat pi = envs::joint_policy(mdp, envs::random_policy_tables(mdp, rng));
  Mat q(4, 4);
  for (Index i = 0; i < q.size(); ++i) q(i) = std::sin(static_cast<Scalar>(i));
  TraceSpec s;
  s.horizon = 1;
  const Mat r = expected_return_operator(mdp, pi, pi, q, s);
  for (int st = 0; st < 4; ++st) {
    for (int j = 0; j < 4; ++j) {
      Scalar next = 0.0;
      for (int s2 = 0; s2 < 4; ++s2) {
        Scalar v = 0.0;
        for (int j2 = 0; j2 < 4; ++j2) v += pi(s2, j2) * q(s2, j2);
        next += mdp.transitions(st * 4 + j, s2) * v;
      }
      CHECK(r(st, j) == doctest::Approx(mdp.rewards(st, j) + 0.9 * next));
    }
  }
}

TEST_CASE("Q^pi is a fixed point of the operator for every variant when pi = beta") {
  Rng rng = make_rng(3, 0);
  const auto mdp = envs::TabularMDPConfig::random(5, 2, 2, 0.9, rng);
  const Mat pi = envs::joint_policy(mdp, envs::random_policy_tables(mdp, rng));
  const auto dp = oracle::dp_policy_eval(mdp, pi, 1e-13);
  REQUIRE(dp.converged);
  for (auto v : {TraceVariant::retrace, TraceVariant::tree_backup, TraceVariant::importance_sampling,
                 TraceVariant::sarsa}) {
    TraceSpec s;
    s.variant = v;
    s.lambda = 0.7;
    const Mat r = expected_return_operator(mdp, pi, pi, dp.q, s);
    CHECK((r - dp.q).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("retrace off-policy still converges to Q^pi") {
  Rng rng = make_rng(4, 0);
  const auto mdp = envs::TabularMDPConfig::random(5, 2, 2, 0.9, rng);
  const Mat pi = envs::joint_policy(mdp, envs::random_policy_tables(mdp, rng));
  const Mat beta = envs::joint_policy(mdp, envs::random_policy_tables(mdp, rng));
  const auto dp = oracle::dp_policy_eval(mdp, pi, 1e-13);
  TraceSpec s;
  s.lambda = 1.0;
  const auto it = iterate_return_operator(mdp, pi, beta, s, Mat::Zero(5, 4), 1e-12, 2000);
  CHECK(it.converged);
  CHECK((it.q - dp.q).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ncd mixer is monotone in every local value") {
  Rng rng = make_rng(6, 0);
  std::normal_distribution<Scalar> nd(0.0, 3.0);
  const Mixer m(mixer_config(MixerMode::ncd_monotonic, 3, 4), 17);
  for (int probe = 0; probe < 200; ++probe) {
    Vec q(3), s(4);
    for (Index i = 0; i < 3; ++i) q(i) = nd(rng);
    for (Index i = 0; i < 4; ++i) s(i) = nd(rng);
    const Vec g = m.local_gradient(m.condition(s), 0, q);
    CHECK(g.minCoeff() >= 0.0);
    for (Index a = 0; a < 3; ++a) {
      Vec up = q;
      up(a) += 1.0;
      CHECK(m.mix(up, s) >= m.mix(q, s));
    }
  }
}

TEST_CASE("linear mixer is a positive weighted sum") {
  const Mixer m(mixer_config(MixerMode::linear, 3, 2), 5);
  Vec s(2);
  s << 0.3, -1.2;
  const auto [w, b] = m.linear_weights(s);
  CHECK(w.minCoeff() >= 1e-3);
  Vec q(3);
  q << 1.0, -2.0, 0.5;
  CHECK(m.mix(q, s) == doctest::Approx(w.dot(q) + b));
}

TEST_CASE("igm holds for monotone mixers") {
  Rng rng = make_rng(7, 0);
  std::normal_distribution<Scalar> nd;
  for (int i = 0; i < 50; ++i) {
    const Mixer m(mixer_config(i % 2 ? MixerMode::linear : MixerMode::ncd_monotonic, 2, 3), 100 + i);
    std::vector<Vec> local{Vec(4), Vec(3)};
    for (auto& v : local) {
      for (Index j = 0; j < v.size(); ++j) v(j) = nd(rng);
    }
    Vec s(3);
    s << nd(rng), nd(rng), nd(rng);
    CHECK(oracle::igm_check(m, local, s).pass);
  }
  const Mixer one(mixer_config(MixerMode::ncd_monotonic, 1, 1), 1);
  Vec q(5);
  q << 0.1, 0.9, -2.0, 0.9, 0.3;
  const auto r = oracle::igm_check(one, std::vector<Vec>{q}, Vec::Ones(1));
  CHECK(r.pass);
  CHECK(r.global_argmax == std::vector<int>{1});
}

TEST_CASE("igm check refuses oversized joint spaces") {
  const Mixer m(mixer_config(MixerMode::ncd_monotonic, 4, 1), 1);
  const std::vector<Vec> local(4, Vec::Zero(40));
  CHECK_THROWS_AS(oracle::igm_check(m, local, Vec::Zero(1)), UsageError);
}

TEST_CASE("critic loss gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (auto mode : {MixerMode::ncd_monotonic, MixerMode::linear}) {
      CHECK(oracle::check_critic_loss_gradient(seed, mode, true, false).pass(1e-4));
      CHECK(oracle::check_critic_loss_gradient(seed, mode, false, true).pass(1e-4));
    }
  }
}

TEST_CASE("continuous critic sees clipped actions") {
  approx::NetSpec body{{3, 8, 1}, approx::Activation::elu, false, 0, 0};
  const AgentCritic c(false, 2, body, 4, AgentCritic::ActionBox{-1.0, 1.0});
  Vec enc(3);
  enc << 0.1, 0.2, 0.3;
  Vec a(2), b(2);
  a << 1.0, -1.0;
  b << 5.0, -3.0;
  CHECK(c.q(enc, a) == c.q(enc, b));
}

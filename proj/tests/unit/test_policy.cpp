#include "doctest.h"

#include "mcem/oracle/gradient_checks.hpp"
#include "mcem/oracle/oracle.hpp"
#include "mcem/policy/mcem.hpp"

#include <numbers>

using namespace mcem;
using namespace mcem::policy;

namespace {

std::vector<JointActionSample> samples_with_values(const std::vector<Scalar>& values) {
  std::vector<JointActionSample> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    JointActionSample s;
    s.actions = {discrete_action(static_cast<int>(i))};
    s.per_agent_logprob = {0.0};
    s.q_tot = values[i];
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("categorical distribution basics") {
  Vec logits(3);
  logits << 1.0, 2.0, 3.0;
  const ActionDist d = ActionDist::categorical(logits);
  const Vec p = d.probs();
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(d.log_prob(discrete_action(2)) == doctest::Approx(std::log(p(2))));
  CHECK(action_index(d.greedy()) == 2);
  CHECK(d.entropy() == doctest::Approx(-(p.array() * p.array().log()).sum()));
  const Vec uniform = ActionDist::categorical(Vec::Zero(4)).probs();
  CHECK(uniform.isApproxToConstant(0.25));
  // Large logits must not overflow.
  Vec big(2);
  big << 1000.0, 0.0;
  CHECK(std::isfinite(ActionDist::categorical(big).log_prob(discrete_action(1))));
}

TEST_CASE("gaussian head clamps sigma and matches the closed-form entropy") {
  Vec raw(4);
  raw << 0.2, -0.3, -50.0, 50.0;
  const ActionDist d = ActionDist::gaussian(raw);
  CHECK(d.sigma()(0) == doctest::Approx(1e-3));
  CHECK(d.sigma()(1) == doctest::Approx(2.0));
  const Scalar h = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * 1e-6) +
                   0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * 4.0);
  CHECK(d.entropy() == doctest::Approx(h));
  CHECK(d.greedy().isApprox(raw.head(2)));

  Vec mid(2);
  mid << 0.0, 0.0;
  const ActionDist unit = ActionDist::gaussian(mid);
  CHECK(unit.sigma()(0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("squashed gaussian mean stays in its box and its gradient matches finite differences") {
  GaussianBounds box;
  box.mean_low = -2.0;
  box.mean_high = 1.0;
  Vec raw(4);
  raw << 30.0, -0.4, 0.1, -0.2;
  const ActionDist d = ActionDist::gaussian(raw, box);
  CHECK(d.mean()(0) == doctest::Approx(1.0));
  CHECK(d.mean()(1) == doctest::Approx(-0.5 + 1.5 * std::tanh(-0.4)));
  CHECK(d.greedy().isApprox(d.mean()));
  Vec a(2);
  a << 0.3, -1.7;
  const Vec g = oracle::finite_diff(raw, [&](const Vec& x) { return ActionDist::gaussian(x, box).log_prob(a); });
  CHECK((g - d.log_prob_grad(a)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("log-prob and entropy gradients match finite differences") {
  Rng rng = make_rng(5, 0);
  std::normal_distribution<Scalar> nd;
  for (int trial = 0; trial < 20; ++trial) {
    Vec logits(4), graw(6);
    for (Index i = 0; i < 4; ++i) logits(i) = nd(rng);
    for (Index i = 0; i < 6; ++i) graw(i) = nd(rng);
    const Vec ca = discrete_action(trial % 4);
    const Vec ga = ActionDist::gaussian(graw).sample(rng).first;
    const Vec gc = oracle::finite_diff(logits, [&](const Vec& x) { return ActionDist::categorical(x).log_prob(ca); });
    CHECK((gc - ActionDist::categorical(logits).log_prob_grad(ca)).cwiseAbs().maxCoeff() < 1e-7);
    const Vec gg = oracle::finite_diff(graw, [&](const Vec& x) { return ActionDist::gaussian(x).log_prob(ga); });
    CHECK((gg - ActionDist::gaussian(graw).log_prob_grad(ga)).cwiseAbs().maxCoeff() < 1e-6);
    const Vec he = oracle::finite_diff(graw, [&](const Vec& x) { return ActionDist::gaussian(x).entropy(); });
    CHECK((he - ActionDist::gaussian(graw).entropy_grad()).cwiseAbs().maxCoeff() < 1e-7);
    const Vec hc = oracle::finite_diff(logits, [&](const Vec& x) { return ActionDist::categorical(x).entropy(); });
    CHECK((hc - ActionDist::categorical(logits).entropy_grad()).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("elite counts") {
  CHECK(elite_count(10, 0.8) == 2);
  CHECK(elite_count(20, 0.9) == 2);
  CHECK(elite_count(3, 0.5) == 1);
  CHECK(elite_count(5, 0.99) == 1);
  CHECK(elite_count(10, 0.05) == 9);
  CHECK_THROWS_AS(elite_count(10, 0.0), ConfigError);
  CHECK(elite_count(1, 0.8) == 1);
}

TEST_CASE("elite selection examples") {
  const EliteSet a = select_elites(samples_with_values({3.0, 1.0, 2.0}), 0.5);
  CHECK(a.sample_indices == std::vector<std::size_t>{0});
  const EliteSet b = select_elites(samples_with_values(std::vector<Scalar>(10, 1.5)), 0.8);
  CHECK(b.sample_indices == std::vector<std::size_t>{0, 1});
  const EliteSet c = select_elites(samples_with_values({0.0, 5.0, 1.0, 5.0, 4.0}), 0.4);
  CHECK(c.sample_indices == std::vector<std::size_t>{1, 3, 4});
  CHECK(c.elites[2].q_tot == 4.0);
  CHECK_THROWS_AS(select_elites({}, 0.5), UsageError);
}

TEST_CASE("elite selection agrees with the quantile oracle on random lists") {
  Rng rng = make_rng(9, 0);
  std::uniform_int_distribution<int> n_dist(1, 30), coarse(0, 3);
  std::uniform_real_distribution<Scalar> rho(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<Scalar> v(static_cast<std::size_t>(n_dist(rng)));
    for (auto& x : v) x = coarse(rng);
    const Scalar r = rho(rng);
    CHECK(select_elites(samples_with_values(v), r).sample_indices == oracle::quantile_oracle(v, r));
  }
}

TEST_CASE("proposal gradient adds beta * grad H once per elite occurrence") {
  Vec logits(3);
  logits << 0.1, -0.4, 0.7;
  const std::vector<ActionDist> dists{ActionDist::categorical(logits)};
  EliteSet set;
  set.elites = samples_with_values({1.0, 2.0});
  set.elites[0].actions = {discrete_action(2)};
  set.elites[1].actions = {discrete_action(2)};
  const auto main = main_policy_raw_gradient(dists, set);
  const auto prop = proposal_policy_raw_gradient(dists, set, 0.03);
  const Vec expected = 2.0 * dists[0].log_prob_grad(discrete_action(2));
  CHECK((main[0] - expected).norm() < 1e-14);
  CHECK((prop[0] - expected - 2.0 * 0.03 * dists[0].entropy_grad()).norm() < 1e-14);
}

TEST_CASE("policy gradient paths match finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (HeadKind kind : {HeadKind::categorical, HeadKind::gaussian}) {
      CHECK(oracle::check_main_policy_gradient(seed, kind, false).pass(1e-4));
      CHECK(oracle::check_main_policy_gradient(seed, kind, true).pass(1e-4));
      CHECK(oracle::check_proposal_policy_gradient(seed, kind, false).pass(1e-4));
      CHECK(oracle::check_centralized_policy_gradient(seed, kind).pass(1e-4));
    }
  }
}

TEST_CASE("sampled joint actions follow the per-agent distributions") {
  Vec logits(2);
  logits << 0.0, std::log(3.0);
  const std::vector<ActionDist> dists{ActionDist::categorical(logits), ActionDist::categorical(Vec::Zero(2))};
  Rng rng = make_rng(1, 1);
  const auto s = sample_joint_actions(dists, 40000, rng);
  int ones = 0;
  for (const auto& j : s) {
    ones += action_index(j.actions[0]);
    CHECK(j.per_agent_logprob[0] == doctest::Approx(dists[0].log_prob(j.actions[0])));
  }
  CHECK(ones / 40000.0 == doctest::Approx(0.75).epsilon(0.02));
}

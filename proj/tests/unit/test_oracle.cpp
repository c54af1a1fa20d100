#include "doctest.h"

#include "mcem/oracle/oracle.hpp"
#include "mcem/oracle/suites.hpp"

#include <cmath>

using namespace mcem;
using namespace mcem::oracle;

namespace {

envs::TabularMDPConfig single_state(Scalar reward) {
  envs::TabularMDPConfig c;
  c.num_states = 1;
  c.num_agents = 2;
  c.num_actions = 2;
  c.transitions = Mat::Ones(4, 1);
  c.rewards = Mat::Constant(1, 4, reward);
  c.gamma = 0.9;
  return c;
}

}  // namespace

TEST_CASE("dp policy evaluation on trivial mdps") {
  const Mat pi = Mat::Constant(1, 4, 0.25);
  const DPResult zero = dp_policy_eval(single_state(0.0), pi, 1e-12);
  CHECK(zero.converged);
  CHECK(zero.q.isZero());
  const DPResult one = dp_policy_eval(single_state(1.0), pi, 1e-12);
  CHECK(one.converged);
  CHECK(one.residual < 1e-12);
  CHECK((one.q.array() - 10.0).abs().maxCoeff() < 1e-10);
  auto bad = single_state(1.0);
  bad.transitions(2, 0) = 0.7;
  CHECK_THROWS_AS(dp_policy_eval(bad, pi, 1e-9), ConfigError);
}

TEST_CASE("dp residual shrinks monotonically") {
  Rng rng = make_rng(1, 0);
  const auto mdp = envs::TabularMDPConfig::random(5, 2, 2, 0.9, rng);
  const Mat pi = envs::joint_policy(mdp, envs::random_policy_tables(mdp, rng));
  const DPResult r = dp_policy_eval(mdp, pi, 1e-12);
  REQUIRE(r.residual_history.size() > 2);
  for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
    CHECK(r.residual_history[i] <= r.residual_history[i - 1]);
  }
}

TEST_CASE("dp Q matches Monte-Carlo rollouts") {
  Rng rng = make_rng(2, 0);
  const auto mdp = envs::TabularMDPConfig::random(5, 2, 2, 0.9, rng);
  const Mat pi = envs::joint_policy(mdp, envs::random_policy_tables(mdp, rng));
  const DPResult dp = dp_policy_eval(mdp, pi, 1e-12);
  const int S = 5, J = 4;
  // Discounting as termination: continue with probability gamma, sum undiscounted rewards.
  const int per_pair = 1000000 / (S * J);
  std::uniform_real_distribution<Scalar> unif(0.0, 1.0);
  auto draw = [&](auto row) {
    const Scalar x = unif(rng);
    Scalar cum = 0.0;
    for (Index i = 0; i < row.size(); ++i) {
      cum += row(i);
      if (x < cum) return static_cast<int>(i);
    }
    return static_cast<int>(row.size() - 1);
  };
  int failures = 0;
  for (int s0 = 0; s0 < S; ++s0) {
    for (int j0 = 0; j0 < J; ++j0) {
      Scalar sum = 0.0, sum_sq = 0.0;
      for (int e = 0; e < per_pair; ++e) {
        int s = s0, j = j0;
        Scalar g = 0.0;
        for (;;) {
          g += mdp.rewards(s, j);
          if (unif(rng) >= mdp.gamma) break;
          s = draw(mdp.transitions.row(s * J + j));
          j = draw(pi.row(s));
        }
        sum += g;
        sum_sq += g * g;
      }
      const Scalar mean = sum / per_pair;
      const Scalar se = std::sqrt((sum_sq / per_pair - mean * mean) / per_pair);
      if (std::abs(mean - dp.q(s0, j0)) > 3.0 * se) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("quantile oracle examples") {
  const std::vector<Scalar> a{3.0, 1.0, 2.0};
  CHECK(quantile_oracle(a, 0.5) == std::vector<std::size_t>{0});
  const std::vector<Scalar> eq(10, 4.0);
  CHECK(quantile_oracle(eq, 0.8) == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(quantile_oracle(std::vector<Scalar>{}, 0.5), UsageError);
}

TEST_CASE("relative error uses the floor") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-5));
}

TEST_CASE("expected payoff by enumeration") {
  const auto g = envs::MatrixGameConfig::penalty();
  Vec p(3), q(3);
  p << 1.0, 0.0, 0.0;
  q << 0.5, 0.0, 0.5;
  const std::vector<Vec> probs{p, q};
  CHECK(expected_payoff(g, probs) == doctest::Approx(0.5 * 10.0 + 0.5 * -100.0));
}

TEST_CASE("constant game: both methods earn the constant") {
  envs::MatrixGameConfig g;
  g.num_agents = 2;
  g.num_actions = 3;
  g.payoff = Vec::Constant(9, 4.0);
  const std::vector<std::uint64_t> seeds{1, 2};
  Theorem51Config cfg;
  cfg.iterations = 50;
  for (const auto& row : theorem_51_experiment(g, seeds, cfg)) {
    CHECK(row.mcem == doctest::Approx(4.0));
    CHECK(row.centralized == doctest::Approx(4.0));
  }
}

TEST_CASE("all-elite updates do not fall below the initial payoff on a unique-maximum game") {
  const auto g = envs::MatrixGameConfig::climbing();
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  Theorem51Config cfg;
  cfg.rho = 0.01;
  cfg.iterations = 500;
  for (const auto& row : theorem_51_experiment(g, seeds, cfg)) CHECK(row.mcem >= row.initial);
}

TEST_CASE("mcem beats the centralized gradient on the penalty game") {
  const SuiteResult r = theorem51_suite(20, 18);
  CHECK(r.pass());
}

TEST_CASE("suites pass at reduced size") {
  CHECK(igm_suite(100).pass());
  CHECK(monotonicity_suite(500).pass());
  CHECK(retrace_suite(3).pass());
  CHECK(coefficient_suite(2000).pass());
  CHECK(quantile_suite(500).pass());
  CHECK(entropy_suite(200000).pass());
}

#include "doctest.h"

#include "mcem/envs/matrix_game.hpp"
#include "mcem/envs/predator_prey.hpp"
#include "mcem/envs/tabular_mdp.hpp"
#include "mcem/replay/replay_buffer.hpp"

#include <filesystem>
#include <fstream>

using namespace mcem;
using namespace mcem::envs;
using Point = PredatorPrey::Point;

namespace {

JointAction joint(std::initializer_list<int> idx) {
  JointAction u;
  for (int i : idx) u.push_back(discrete_action(i));
  return u;
}

PredatorPrey scenario(PredatorPreyConfig cfg = {}) {
  cfg.num_landmarks = 0;
  PredatorPrey env(cfg);
  Rng rng(1);
  env.reset(rng);
  for (auto& v : env.predator_vel()) v.setZero();
  for (auto& v : env.prey_vel()) v.setZero();
  return env;
}

JointAction still(int n) { return JointAction(static_cast<std::size_t>(n), Vec::Zero(2)); }

}  // namespace

TEST_CASE("penalty and climbing payoffs in mixed-radix order") {
  const auto p = MatrixGameConfig::penalty(-50.0);
  CHECK(p.payoff_at(joint({0, 0})) == 10.0);
  CHECK(p.payoff_at(joint({0, 2})) == -50.0);
  CHECK(p.payoff_at(joint({2, 0})) == -50.0);
  CHECK(p.payoff_at(joint({1, 1})) == 2.0);
  const auto c = MatrixGameConfig::climbing();
  CHECK(c.payoff_at(joint({0, 1})) == -30.0);
  CHECK(c.payoff_at(joint({1, 2})) == 6.0);
  CHECK(joint_index(joint({1, 2}), 3) == 5);
  CHECK(decode_joint_index(5, 2, 3) == joint({1, 2}));
  CHECK_THROWS_AS(MatrixGameConfig::preset("nope"), ConfigError);
}

TEST_CASE("matrix game episode and success flag") {
  auto cfg = MatrixGameConfig::penalty();
  cfg.episode_length = 2;
  MatrixGame g(cfg);
  Rng rng(1);
  g.reset(rng);
  auto r = g.step(joint({0, 0}));
  CHECK_FALSE(r.terminal);
  CHECK(r.reward == 10.0);
  r = g.step(joint({1, 1}));
  CHECK(r.terminal);
  CHECK_FALSE(g.episode_success());
  CHECK_THROWS_AS(g.step(joint({0, 0})), UsageError);
  CHECK_THROWS_AS(MatrixGame(cfg).step(joint({0, 3})), std::exception);
}

TEST_CASE("payoff csv side file") {
  const auto path = std::filesystem::temp_directory_path() / "mcem_payoff_test.csv";
  {
    std::ofstream out(path);
    out << "joint,payoff\n0,1\n1,-2.5\n2,3\n3,4\n";
  }
  const Vec v = load_payoff_csv(path);
  REQUIRE(v.size() == 4);
  CHECK(v(1) == -2.5);
  {
    std::ofstream out(path);
    out << "0,1\n1,abc\n";
  }
  CHECK_THROWS_AS(load_payoff_csv(path), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("tabular mdp validation and rollout") {
  Rng rng(3);
  auto cfg = TabularMDPConfig::random(4, 2, 2, 0.9, rng);
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.transitions(0, 0) += 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  TabularMDP env(cfg);
  env.reset(rng);
  const auto r = env.step(joint({1, 0}));
  CHECK(r.reward == cfg.rewards(0, 2));
  CHECK(r.observations[0].sum() == 1.0);
  CHECK_FALSE(env.success_defined());
}

TEST_CASE("predator-prey dimensions and presets") {
  for (auto [name, n, m] : {std::tuple{"3a1p", 3, 1}, {"6a2p", 6, 2}, {"9a3p", 9, 3}}) {
    const auto c = PredatorPreyConfig::preset(name);
    CHECK(c.num_predators == n);
    CHECK(c.num_prey == m);
    PredatorPrey env(c);
    Rng rng(2);
    const auto o = env.reset(rng);
    CHECK(o.observations.size() == static_cast<std::size_t>(n));
    CHECK(o.observations[0].size() == 4 + 5 * (n - 1) + 5 * m + 3 * c.num_landmarks);
    CHECK(o.state.size() == 4 * n + 4 * m + 2 * c.num_landmarks);
    CHECK(env.spec().action_dim == 2);
    CHECK_FALSE(env.spec().discrete);
  }
  CHECK_THROWS_AS(PredatorPreyConfig::preset("2a2p"), ConfigError);
}

TEST_CASE("predator-prey config rejects slow prey and inverted radii") {
  PredatorPreyConfig c;
  c.prey_max_speed = c.predator_max_speed;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.capture_radius = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("supported capture gives the team reward, unsupported capture the penalty") {
  auto env = scenario();
  env.prey_pos()[0] = Point(0.0, 0.0);
  env.predator_pos() = {Point(0.05, 0.0), Point(0.0, 0.25), Point(-0.9, -0.9)};
  CHECK(env.reward() == 10.0);
  env.predator_pos()[1] = Point(0.0, 0.6);
  CHECK(env.reward() == -1.0);
  env.predator_pos()[0] = Point(0.5, 0.0);
  CHECK(env.reward() == 0.0);
  // Two predators close but none within capture radius.
  env.predator_pos() = {Point(0.15, 0.0), Point(0.0, 0.2), Point(-0.9, -0.9)};
  CHECK(env.reward() == 0.0);
}

TEST_CASE("success flag records a cooperative capture during the episode") {
  auto env = scenario();
  env.prey_pos()[0] = Point(0.0, 0.0);
  env.predator_pos() = {Point(0.02, 0.0), Point(-0.02, 0.0), Point(0.0, 0.02)};
  const auto r = env.step(still(3));
  CHECK(r.reward == 10.0);
  CHECK(env.episode_success());
  CHECK_FALSE(r.terminal);
}

TEST_CASE("walls clamp position and stop the outward velocity") {
  auto env = scenario();
  env.prey_pos()[0] = Point(-0.9, -0.9);
  env.predator_pos() = {Point(0.99, 0.0), Point(0.0, 0.0), Point(0.5, 0.5)};
  env.predator_vel()[0] = Point(1.0, 0.3);
  JointAction u = still(3);
  u[0] << 1.0, 0.0;
  env.step(u);
  CHECK(env.predator_pos()[0](0) == 1.0);
  CHECK(env.predator_vel()[0](0) == 0.0);
  CHECK(env.predator_vel()[0](1) != 0.0);
}

TEST_CASE("speeds never exceed their caps") {
  auto env = scenario();
  env.prey_pos()[0] = Point(0.3, 0.0);
  env.predator_pos() = {Point(-0.8, -0.8), Point(0.0, 0.0), Point(0.2, 0.0)};
  JointAction u = still(3);
  for (auto& a : u) a << 1.0, 1.0;
  for (int t = 0; t < 30; ++t) {
    env.step(u);
    for (const auto& v : env.predator_vel()) CHECK(v.norm() <= 1.0 + 1e-12);
    CHECK(env.prey_vel()[0].norm() <= 1.3 + 1e-12);
  }
}

TEST_CASE("actions outside the box are clipped") {
  auto a = scenario();
  auto b = a;
  JointAction big = still(3), unit = still(3);
  big[1] << 7.0, -9.0;
  unit[1] << 1.0, -1.0;
  a.step(big);
  b.step(unit);
  CHECK(a.predator_pos()[1] == b.predator_pos()[1]);
}

TEST_CASE("prey flees the nearest visible predator and idles otherwise") {
  auto env = scenario();
  env.prey_pos()[0] = Point(0.0, 0.0);
  env.predator_pos() = {Point(-0.3, 0.0), Point(0.0, 0.9), Point(0.9, 0.9)};
  env.step(still(3));
  CHECK(env.prey_pos()[0](0) > 0.0);
  CHECK(std::abs(env.prey_pos()[0](1)) < 1e-12);

  auto far = scenario();
  far.prey_pos()[0] = Point(-0.9, -0.9);
  far.predator_pos() = {Point(0.9, 0.9), Point(0.8, 0.9), Point(0.9, 0.8)};
  far.step(still(3));
  CHECK(far.prey_pos()[0] == Point(-0.9, -0.9));
}

TEST_CASE("landmarks block movement") {
  PredatorPreyConfig c;
  c.num_landmarks = 1;
  PredatorPrey env(c);
  Rng rng(1);
  env.reset(rng);
  env.landmark_pos()[0] = Point(0.0, 0.0);
  env.prey_pos()[0] = Point(-0.9, -0.9);
  env.predator_pos() = {Point(-0.25, 0.0), Point(0.9, 0.9), Point(0.8, 0.9)};
  for (auto& v : env.predator_vel()) v.setZero();
  env.prey_vel()[0].setZero();
  JointAction u = still(3);
  u[0] << 1.0, 0.0;
  for (int t = 0; t < 20; ++t) {
    env.step(u);
    CHECK(env.predator_pos()[0].norm() >= c.landmark_radius - 1e-12);
  }
}

TEST_CASE("observations hide entities outside the view radius") {
  auto env = scenario();
  env.prey_pos()[0] = Point(0.9, 0.9);
  env.predator_pos() = {Point(-0.9, -0.9), Point(-0.7, -0.9), Point(0.9, -0.9)};
  const Vec o = env.observe(0);
  CHECK(o(4) == 1.0);
  CHECK(o(5) == doctest::Approx(0.2));
  CHECK(o.segment(9, 5).isZero());
  CHECK(o.segment(14, 5).isZero());
  CHECK_THROWS_AS(env.observe(3), UsageError);
}

TEST_CASE("same seed, same episode") {
  PredatorPrey a(PredatorPreyConfig{}), b(PredatorPreyConfig{});
  Rng ra(42), rb(42);
  CHECK(a.reset(ra).state == b.reset(rb).state);
}

TEST_CASE("replay buffer keeps the newest episodes") {
  replay::ReplayBuffer buf(2);
  for (int i = 0; i < 3; ++i) {
    replay::Episode ep;
    replay::EpisodeStep s;
    s.state = Vec::Zero(1);
    s.observations = {Vec::Zero(1)};
    s.actions = {discrete_action(0)};
    s.behavior_logprob = {0.0};
    s.reward = i;
    ep.steps.push_back(s);
    ep.final_observations = {Vec::Zero(1)};
    ep.final_state = Vec::Zero(1);
    buf.append_episode(ep);
  }
  CHECK(buf.size() == 2);
  CHECK(buf.at(0).steps[0].reward == 1.0);
  CHECK(buf.newest().steps[0].reward == 2.0);
  CHECK_THROWS_AS(buf.append_episode(replay::Episode{}), UsageError);
  CHECK_THROWS_AS(replay::ReplayBuffer(0), ConfigError);
  Rng rng(1);
  CHECK(buf.sample_batch(5, rng).size() == 5);
  replay::ReplayBuffer empty(3);
  CHECK_THROWS_AS(empty.sample_batch(1, rng), UsageError);
}

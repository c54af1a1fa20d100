#include "mcem/envs/matrix_game.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mcem::envs {

void EnvSpec::validate() const {
  if (num_agents < 1) throw ConfigError("environment needs at least one agent");
  if (step_limit < 1) throw ConfigError("environment step limit must be >= 1");
  if (discrete && num_actions < 1) throw ConfigError("discrete environment needs |U| >= 1");
  if (!discrete && action_dim < 1) throw ConfigError("continuous environment needs action_dim >= 1");
}

void Environment::check_joint_action(const JointAction& u) const {
  const EnvSpec& s = spec();
  if (static_cast<int>(u.size()) != s.num_agents) {
    throw UsageError("joint action has " + std::to_string(u.size()) + " entries, expected " +
                     std::to_string(s.num_agents));
  }
  for (const Vec& a : u) {
    if (s.discrete) {
      if (a.size() != 1) throw UsageError("discrete action must be a single index");
      const Scalar v = a(0);
      if (v != std::floor(v) || v < 0 || v >= s.num_actions) {
        throw UsageError("discrete action index outside [0, " + std::to_string(s.num_actions) + ")");
      }
    } else {
      if (a.size() != s.action_dim) throw UsageError("continuous action has the wrong dimension");
      if (!a.allFinite()) throw UsageError("continuous action is not finite");
    }
  }
}

std::size_t joint_index(const JointAction& u, int num_actions) {
  std::size_t idx = 0;
  for (const Vec& a : u) idx = idx * static_cast<std::size_t>(num_actions) + static_cast<std::size_t>(action_index(a));
  return idx;
}

JointAction decode_joint_index(std::size_t index, int num_agents, int num_actions) {
  JointAction u(static_cast<std::size_t>(num_agents));
  for (int a = num_agents - 1; a >= 0; --a) {
    u[static_cast<std::size_t>(a)] = discrete_action(static_cast<int>(index % static_cast<std::size_t>(num_actions)));
    index /= static_cast<std::size_t>(num_actions);
  }
  return u;
}

void MatrixGameConfig::validate() const {
  if (num_agents < 1 || num_actions < 1) throw ConfigError("matrix game needs k >= 1 and |U| >= 1");
  if (episode_length < 1) throw ConfigError("matrix game episode length must be >= 1");
  const double expected = std::pow(static_cast<double>(num_actions), num_agents);
  if (static_cast<double>(payoff.size()) != expected) {
    throw ConfigError("matrix game payoff has " + std::to_string(payoff.size()) + " entries, expected |U|^k = " +
                      std::to_string(static_cast<long long>(expected)));
  }
  if (!payoff.allFinite()) throw ConfigError("matrix game payoff must be finite");
}

MatrixGameConfig MatrixGameConfig::climbing() {
  MatrixGameConfig c;
  c.payoff.resize(9);
  c.payoff << 11, -30, 0, -30, 7, 6, 0, 0, 5;
  return c;
}

MatrixGameConfig MatrixGameConfig::penalty(Scalar k) {
  MatrixGameConfig c;
  c.payoff.resize(9);
  c.payoff << 10, 0, k, 0, 2, 0, k, 0, 10;
  return c;
}

MatrixGameConfig MatrixGameConfig::preset(std::string_view name) {
  if (name == "climbing") return climbing();
  if (name == "penalty") return penalty();
  throw ConfigError("unknown matrix game preset '" + std::string(name) + "' (expected climbing|penalty)");
}

Vec load_payoff_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open payoff file '" + path.string() + "'");
  std::vector<Scalar> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    std::istringstream ss(field);
    Scalar v = 0.0;
    if (!(ss >> v)) {
      if (values.empty() && lineno == 1) continue;  // header row
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": payoff is not a number");
    }
    values.push_back(v);
  }
  Vec out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Index>(i)) = values[i];
  return out;
}

MatrixGame::MatrixGame(MatrixGameConfig config) : config_(std::move(config)) {
  config_.validate();
  spec_.num_agents = config_.num_agents;
  spec_.discrete = true;
  spec_.num_actions = config_.num_actions;
  spec_.obs_dim = 1;
  spec_.state_dim = 1;
  spec_.step_limit = config_.episode_length;
  spec_.gamma = 0.99;
}

Observation MatrixGame::reset(Rng& /*rng*/) {
  t_ = 0;
  success_ = true;
  Observation o;
  for (int a = 0; a < config_.num_agents; ++a) o.observations.push_back(observe(a));
  o.state = state();
  return o;
}

StepResult MatrixGame::step(const JointAction& u) {
  check_joint_action(u);
  if (t_ >= config_.episode_length) throw UsageError("matrix game stepped after termination");
  StepResult r;
  r.reward = config_.payoff_at(u);
  success_ = success_ && r.reward >= config_.max_payoff();
  ++t_;
  r.terminal = t_ >= config_.episode_length;
  for (int a = 0; a < config_.num_agents; ++a) r.observations.push_back(observe(a));
  r.state = state();
  return r;
}

Vec MatrixGame::observe(int agent) const {
  if (agent < 0 || agent >= config_.num_agents) throw UsageError("agent index out of range");
  return Vec::Ones(1);
}

Vec MatrixGame::state() const { return Vec::Ones(1); }

}  // namespace mcem::envs

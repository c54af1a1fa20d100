#include "mcem/trainer/inputs.hpp"

namespace mcem::trainer {

InputLayout InputLayout::from_env(const envs::EnvSpec& spec, int window, bool prev_action, bool agent_id) {
  if (window < 1) throw ConfigError("input window must be >= 1");
  InputLayout l;
  l.num_agents = spec.num_agents;
  l.obs_dim = spec.obs_dim;
  l.action_size = spec.action_size();
  l.discrete = spec.discrete;
  l.window = window;
  l.prev_action = prev_action;
  l.agent_id = agent_id;
  return l;
}

Index InputLayout::feature_size() const {
  return obs_dim + (prev_action ? action_size : 0) + (agent_id ? num_agents : 0);
}

Vec InputLayout::action_feature(const Vec& action, Scalar low, Scalar high) const {
  if (discrete) {
    Vec f = Vec::Zero(action_size);
    f(action_index(action)) = 1.0;
    return f;
  }
  return action.cwiseMax(low).cwiseMin(high);
}

Vec InputLayout::feature(const Vec& observation, const Vec& prev_action_feature, int agent) const {
  if (observation.size() != obs_dim) throw UsageError("observation size does not match the input layout");
  Vec f = Vec::Zero(feature_size());
  f.head(obs_dim) = observation;
  Index off = obs_dim;
  if (prev_action) {
    if (prev_action_feature.size() == action_size) f.segment(off, action_size) = prev_action_feature;
    off += action_size;
  }
  if (agent_id) f(off + agent) = 1.0;
  return f;
}

InputHistory::InputHistory(const InputLayout& layout, int agent, Scalar action_low, Scalar action_high)
    : layout_(layout), agent_(agent), low_(action_low), high_(action_high) {}

Vec InputHistory::push(const Vec& observation, const Vec* prev_action) {
  const Vec prev = prev_action ? layout_.action_feature(*prev_action, low_, high_) : Vec();
  features_.push_back(layout_.feature(observation, prev, agent_));
  const Index f = layout_.feature_size();
  Vec in = Vec::Zero(layout_.input_size());
  for (int w = 0; w < layout_.window; ++w) {
    const auto t = static_cast<std::ptrdiff_t>(features_.size()) - 1 - w;
    if (t < 0) break;
    in.segment(w * f, f) = features_[static_cast<std::size_t>(t)];
  }
  return in;
}

Mat episode_inputs(const InputLayout& layout, const replay::Episode& episode, int agent, Scalar action_low,
                   Scalar action_high) {
  const auto a = static_cast<std::size_t>(agent);
  const auto T = static_cast<Index>(episode.length());
  InputHistory hist(layout, agent, action_low, action_high);
  Mat out(layout.input_size(), T + 1);
  for (Index t = 0; t <= T; ++t) {
    const Vec& obs = t < T ? episode.steps[static_cast<std::size_t>(t)].observations[a] : episode.final_observations[a];
    const Vec* prev = t > 0 ? &episode.steps[static_cast<std::size_t>(t - 1)].actions[a] : nullptr;
    out.col(t) = hist.push(obs, prev);
  }
  return out;
}

Mat episode_actions(const replay::Episode& episode, int agent) {
  const auto a = static_cast<std::size_t>(agent);
  const auto T = static_cast<Index>(episode.length());
  if (T == 0) return Mat();
  Mat out(episode.steps[0].actions[a].size(), T);
  for (Index t = 0; t < T; ++t) out.col(t) = episode.steps[static_cast<std::size_t>(t)].actions[a];
  return out;
}

Mat episode_states(const replay::Episode& episode) {
  const auto T = static_cast<Index>(episode.length());
  Mat out(episode.final_state.size(), T + 1);
  for (Index t = 0; t < T; ++t) out.col(t) = episode.steps[static_cast<std::size_t>(t)].state;
  out.col(T) = episode.final_state;
  return out;
}

}  // namespace mcem::trainer

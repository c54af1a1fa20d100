#include "mcem/replay/replay_buffer.hpp"

#include <cmath>
#include <cstdio>

namespace mcem::replay {

Scalar Episode::total_reward() const {
  Scalar r = 0.0;
  for (const auto& s : steps) r += s.reward;
  return r;
}

void Episode::validate() const {
  if (steps.empty()) throw UsageError("episode has no steps");
  const std::size_t agents = steps.front().observations.size();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& s = steps[t];
    if (s.observations.size() != agents || s.actions.size() != agents || s.behavior_logprob.size() != agents) {
      throw UsageError("episode step " + std::to_string(t) + " has inconsistent agent counts");
    }
    for (Scalar lp : s.behavior_logprob) {
      if (!std::isfinite(lp)) throw UsageError("episode step " + std::to_string(t) + " has a non-finite log beta");
    }
    if (s.terminal && t + 1 != steps.size()) throw UsageError("terminal flag set before the final step");
  }
  if (final_observations.size() != agents) throw UsageError("episode lacks final observations");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::set_capacity(std::size_t capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  capacity_ = capacity;
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

void ReplayBuffer::append_episode(Episode episode) {
  if (episode.steps.empty()) throw UsageError("cannot append an empty episode");
  episode.validate();
  episodes_.push_back(std::make_shared<const Episode>(std::move(episode)));
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::vector<EpisodePtr> ReplayBuffer::sample_batch(std::size_t batch_size, Rng& rng) const {
  if (episodes_.empty()) throw UsageError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
  std::vector<EpisodePtr> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) out.push_back(episodes_[pick(rng)]);
  return out;
}

const Episode& ReplayBuffer::newest() const {
  if (episodes_.empty()) throw UsageError("replay buffer is empty");
  return *episodes_.back();
}

std::span<const EpisodeStep> window(const Episode& episode, std::size_t t, std::size_t n) {
  if (t >= episode.steps.size()) {
    throw UsageError("window start " + std::to_string(t) + " outside episode of length " +
                     std::to_string(episode.steps.size()));
  }
  const std::size_t len = std::min(n, episode.steps.size() - t);
  return std::span<const EpisodeStep>(episode.steps).subspan(t, len);
}

namespace {

std::string episode_key(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "e%07zu/", i);
  return prefix + buf;
}

const Mat& need(const approx::TensorList& tensors, const std::string& name) {
  const Mat* m = approx::find_tensor(tensors, name);
  if (!m) throw LoadError("replay dump lacks tensor '" + name + "'");
  return *m;
}

}  // namespace

void ReplayBuffer::append_tensors(approx::TensorList& out, const std::string& prefix) const {
  Mat header(1, 2);
  header << static_cast<Scalar>(episodes_.size()), static_cast<Scalar>(capacity_);
  out.emplace_back(prefix + "#header", header);
  for (std::size_t i = 0; i < episodes_.size(); ++i) {
    const Episode& ep = *episodes_[i];
    const std::string key = episode_key(prefix, i);
    const auto steps = static_cast<Index>(ep.steps.size());
    const std::size_t agents = ep.final_observations.size();
    Mat state(ep.final_state.size(), steps + 1);
    Mat reward(1, steps), terminal(1, steps), logbeta(static_cast<Index>(agents), steps);
    for (Index t = 0; t < steps; ++t) {
      const auto& s = ep.steps[static_cast<std::size_t>(t)];
      if (state.rows() > 0) state.col(t) = s.state;
      reward(0, t) = s.reward;
      terminal(0, t) = s.terminal ? 1.0 : 0.0;
      for (std::size_t a = 0; a < agents; ++a) logbeta(static_cast<Index>(a), t) = s.behavior_logprob[a];
    }
    if (state.rows() > 0) state.col(steps) = ep.final_state;
    out.emplace_back(key + "state", state);
    out.emplace_back(key + "reward", reward);
    out.emplace_back(key + "terminal", terminal);
    out.emplace_back(key + "logbeta", logbeta);
    for (std::size_t a = 0; a < agents; ++a) {
      const Index obs_dim = ep.final_observations[a].size();
      const Index act_dim = ep.steps.front().actions[a].size();
      Mat obs(obs_dim, steps + 1), act(act_dim, steps);
      for (Index t = 0; t < steps; ++t) {
        obs.col(t) = ep.steps[static_cast<std::size_t>(t)].observations[a];
        act.col(t) = ep.steps[static_cast<std::size_t>(t)].actions[a];
      }
      obs.col(steps) = ep.final_observations[a];
      out.emplace_back(key + "obs/" + std::to_string(a), obs);
      out.emplace_back(key + "act/" + std::to_string(a), act);
    }
  }
}

void ReplayBuffer::restore_tensors(const approx::TensorList& tensors, const std::string& prefix) {
  const Mat& header = need(tensors, prefix + "#header");
  if (header.size() != 2) throw LoadError("malformed replay header");
  const auto count = static_cast<std::size_t>(header(0));
  ReplayBuffer fresh(static_cast<std::size_t>(header(1)));
  for (std::size_t i = 0; i < count; ++i) {
    const std::string key = episode_key(prefix, i);
    const Mat& state = need(tensors, key + "state");
    const Mat& reward = need(tensors, key + "reward");
    const Mat& terminal = need(tensors, key + "terminal");
    const Mat& logbeta = need(tensors, key + "logbeta");
    const Index steps = reward.cols();
    const auto agents = static_cast<std::size_t>(logbeta.rows());
    Episode ep;
    ep.steps.resize(static_cast<std::size_t>(steps));
    std::vector<const Mat*> obs(agents), act(agents);
    for (std::size_t a = 0; a < agents; ++a) {
      obs[a] = &need(tensors, key + "obs/" + std::to_string(a));
      act[a] = &need(tensors, key + "act/" + std::to_string(a));
      if (obs[a]->cols() != steps + 1 || act[a]->cols() != steps) throw LoadError("malformed replay episode");
    }
    for (Index t = 0; t < steps; ++t) {
      auto& s = ep.steps[static_cast<std::size_t>(t)];
      s.state = state.col(t);
      s.reward = reward(0, t);
      s.terminal = terminal(0, t) != 0.0;
      for (std::size_t a = 0; a < agents; ++a) {
        s.observations.push_back(obs[a]->col(t));
        s.actions.push_back(act[a]->col(t));
        s.behavior_logprob.push_back(logbeta(static_cast<Index>(a), t));
      }
    }
    ep.final_state = state.col(steps);
    for (std::size_t a = 0; a < agents; ++a) ep.final_observations.push_back(obs[a]->col(steps));
    fresh.append_episode(std::move(ep));
  }
  *this = std::move(fresh);
}

}  // namespace mcem::replay

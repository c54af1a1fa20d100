#pragma once

#include "mcem/approx/tensor_io.hpp"
#include "mcem/core.hpp"

#include <deque>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace mcem::replay {

/// One transition: shared team reward plus per-agent observations, actions and the
/// behavior policy's log-probabilities of those actions.
struct EpisodeStep {
  Vec state;
  std::vector<Vec> observations;
  JointAction actions;
  Scalar reward = 0.0;
  bool terminal = false;
  std::vector<Scalar> behavior_logprob;
};

struct Episode {
  std::vector<EpisodeStep> steps;
  /// Observations / state after the final step (bootstrap point for truncated episodes).
  std::vector<Vec> final_observations;
  Vec final_state;

  std::size_t length() const { return steps.size(); }
  Scalar total_reward() const;
  /// Checks the step-level invariants; throws UsageError when violated.
  void validate() const;
};

using EpisodePtr = std::shared_ptr<const Episode>;

/// FIFO ring of whole episodes.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 5000);

  void append_episode(Episode episode);
  /// `batch_size` episodes drawn uniformly with replacement.
  std::vector<EpisodePtr> sample_batch(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  void set_capacity(std::size_t capacity);
  bool empty() const { return episodes_.empty(); }
  const Episode& at(std::size_t i) const { return *episodes_.at(i); }
  const Episode& newest() const;
  void clear() { episodes_.clear(); }

  void append_tensors(approx::TensorList& out, const std::string& prefix) const;
  void restore_tensors(const approx::TensorList& tensors, const std::string& prefix);

 private:
  std::size_t capacity_;
  std::deque<EpisodePtr> episodes_;
};

/// Steps [t, min(t + n, length)) of an episode.
std::span<const EpisodeStep> window(const Episode& episode, std::size_t t, std::size_t n);

}  // namespace mcem::replay

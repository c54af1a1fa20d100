#pragma once

#include "mcem/approx/network.hpp"
#include "mcem/policy/distribution.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mcem::policy {

/// A per-agent stochastic policy: network body plus a categorical or Gaussian head.
///
/// The network consumes the agent's per-step history input; its encoder output
/// (identity for non-recurrent bodies) is the "history encoding" the head reads.
class StochasticPolicy {
 public:
  StochasticPolicy() = default;
  /// `body.layer_sizes.back()` is overwritten with the head's raw output size.
  StochasticPolicy(HeadKind kind, Index action_size, approx::NetSpec body, std::uint64_t seed,
                   GaussianBounds bounds = {});

  HeadKind kind() const { return kind_; }
  Index action_size() const { return action_size_; }
  Index raw_size() const { return kind_ == HeadKind::categorical ? action_size_ : 2 * action_size_; }
  const approx::Network& network() const { return net_; }
  approx::ParamStore& params() { return params_; }
  const approx::ParamStore& params() const { return params_; }

  Mat encode(const Mat& inputs, approx::Network::EncodeTrace* trace = nullptr) const {
    return net_.encode(params_, inputs, trace);
  }

  Vec encode_step(const Vec& input, Vec& hidden) const { return net_.encode_step(params_, input, hidden); }

  ActionDist distribution(const Vec& encoding) const;
  std::vector<ActionDist> distributions(const Mat& encodings) const;

  /// Pushes d(objective)/d(raw head output) for every column of `encodings` into the head
  /// parameters; returns d(objective)/d(encoding).
  Mat backprop_head(const Mat& encodings, const Mat& d_raw);
  void backprop_encoder(const approx::Network::EncodeTrace& trace, const Mat& d_encoding);

 private:
  ActionDist make_dist(const Vec& raw) const;

  HeadKind kind_ = HeadKind::categorical;
  Index action_size_ = 0;
  GaussianBounds bounds_;
  approx::Network net_;
  approx::ParamStore params_;
};

/// Main policy (theta) and its entropy-regularized proposal companion (theta-hat).
struct PolicyPair {
  StochasticPolicy main;
  StochasticPolicy proposal;
  Scalar entropy_coeff = 0.03;
};

/// Builds a pair with independently seeded parameters of the same architecture.
PolicyPair make_policy_pair(HeadKind kind, Index action_size, const approx::NetSpec& body,
                            std::uint64_t seed, Scalar entropy_coeff, GaussianBounds bounds = {});

/// Samples one action from `head` evaluated at a single history encoding.
std::pair<Vec, Scalar> sample_action(const StochasticPolicy& head, const Vec& encoding, Rng& rng);
Scalar log_prob(const StochasticPolicy& head, const Vec& encoding, const Vec& action);
Scalar entropy(const StochasticPolicy& head, const Vec& encoding);

}  // namespace mcem::policy

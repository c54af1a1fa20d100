#pragma once

#include "mcem/approx/activation.hpp"
#include "mcem/core.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace mcem::policy {

enum class HeadKind { categorical, gaussian };

/// Positive range of the Gaussian standard deviation after the softplus map, and an optional
/// box for the mean: when mean_low < mean_high the mean is squashed into it with tanh.
struct GaussianBounds {
  Scalar min = 1e-3;
  Scalar max = 2.0;
  Scalar mean_low = 0.0;
  Scalar mean_high = 0.0;

  bool squash_mean() const { return mean_low < mean_high; }
};

template <typename Derived>
VecT<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  const S m = logits.maxCoeff();
  const S lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

template <typename Derived>
VecT<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  return log_softmax(logits).array().exp().matrix();
}

/// log N(u | mu, sigma^2).
template <typename S>
S gaussian_log_density(S u, S mu, S sigma) {
  const S z = (u - mu) / sigma;
  return -std::log(sigma) - S(0.5) * std::log(S(2) * std::numbers::pi_v<S>) - S(0.5) * z * z;
}

/// 0.5 * log(2 pi e sigma^2).
template <typename S>
S gaussian_entropy(S sigma) {
  return S(0.5) * std::log(S(2) * std::numbers::pi_v<S> * std::numbers::e_v<S> * sigma * sigma);
}

/// Action distribution produced by a policy head from its raw network output.
///
/// Categorical: raw = logits over |U| actions.
/// Gaussian: raw = [pre-mean (d); pre-sigma (d)], sigma = clamp(softplus(pre), min, max), mean = pre-mean
/// or its tanh image in [mean_low, mean_high].
/// All gradients are taken with respect to the raw output.
class ActionDist {
 public:
  static ActionDist categorical(const Vec& logits);
  static ActionDist gaussian(const Vec& raw, GaussianBounds bounds = {});
  /// Gaussian with explicit moments (no raw output behind it; gradients w.r.t. raw are unavailable).
  static ActionDist gaussian_moments(const Vec& mean, const Vec& sigma);

  HeadKind kind() const { return kind_; }
  /// |U| for categorical heads, action dimension for Gaussian heads.
  Index action_size() const { return kind_ == HeadKind::categorical ? log_probs_.size() : mean_.size(); }
  Index raw_size() const { return kind_ == HeadKind::categorical ? log_probs_.size() : 2 * mean_.size(); }

  Vec probs() const { return log_probs_.array().exp().matrix(); }
  const Vec& mean() const { return mean_; }
  const Vec& sigma() const { return sigma_; }

  Scalar log_prob(const Vec& action) const;
  Vec log_prob_grad(const Vec& action) const;
  Scalar entropy() const;
  Vec entropy_grad() const;

  /// Draws an action and its exact log-probability (pre-clip for Gaussian heads).
  std::pair<Vec, Scalar> sample(Rng& rng) const;
  /// Argmax action (categorical) or the mean (Gaussian).
  Vec greedy() const;

 private:
  HeadKind kind_ = HeadKind::categorical;
  Vec log_probs_;
  Vec mean_;
  Vec sigma_;
  Vec dsigma_dpre_;
  Vec dmean_dpre_;
  bool has_raw_ = true;
};

}  // namespace mcem::policy

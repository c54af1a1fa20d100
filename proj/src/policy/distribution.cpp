#include "mcem/policy/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcem::policy {

ActionDist ActionDist::categorical(const Vec& logits) {
  if (logits.size() == 0) throw ConfigError("categorical head with zero actions");
  if (!logits.allFinite()) throw NumericalError("categorical head produced non-finite logits");
  ActionDist d;
  d.kind_ = HeadKind::categorical;
  d.log_probs_ = log_softmax(logits);
  return d;
}

ActionDist ActionDist::gaussian(const Vec& raw, GaussianBounds bounds) {
  if (raw.size() == 0 || raw.size() % 2 != 0) throw ConfigError("Gaussian head needs an even, nonzero output size");
  if (!raw.allFinite()) throw NumericalError("Gaussian head produced non-finite outputs");
  const Index dim = raw.size() / 2;
  ActionDist d;
  d.kind_ = HeadKind::gaussian;
  d.mean_ = raw.head(dim);
  d.dmean_dpre_ = Vec::Ones(dim);
  if (bounds.squash_mean()) {
    const Scalar mid = 0.5 * (bounds.mean_high + bounds.mean_low);
    const Scalar half = 0.5 * (bounds.mean_high - bounds.mean_low);
    for (Index i = 0; i < dim; ++i) {
      const Scalar t = std::tanh(raw(i));
      d.mean_(i) = mid + half * t;
      d.dmean_dpre_(i) = half * (1.0 - t * t);
    }
  }
  d.sigma_.resize(dim);
  d.dsigma_dpre_.resize(dim);
  for (Index i = 0; i < dim; ++i) {
    const Scalar pre = raw(dim + i);
    const Scalar sp = approx::softplus(pre);
    if (sp <= bounds.min) {
      d.sigma_(i) = bounds.min;
      d.dsigma_dpre_(i) = 0.0;
    } else if (sp >= bounds.max) {
      d.sigma_(i) = bounds.max;
      d.dsigma_dpre_(i) = 0.0;
    } else {
      d.sigma_(i) = sp;
      d.dsigma_dpre_(i) = approx::sigmoid(pre);
    }
  }
  return d;
}

ActionDist ActionDist::gaussian_moments(const Vec& mean, const Vec& sigma) {
  if (mean.size() != sigma.size() || mean.size() == 0) throw ConfigError("Gaussian moments shape mismatch");
  if ((sigma.array() <= 0.0).any()) throw ConfigError("Gaussian sigma must be positive");
  ActionDist d;
  d.kind_ = HeadKind::gaussian;
  d.mean_ = mean;
  d.sigma_ = sigma;
  d.dsigma_dpre_ = Vec::Zero(mean.size());
  d.dmean_dpre_ = Vec::Zero(mean.size());
  d.has_raw_ = false;
  return d;
}

Scalar ActionDist::log_prob(const Vec& action) const {
  if (kind_ == HeadKind::categorical) {
    const int a = action_index(action);
    if (a < 0 || a >= log_probs_.size()) {
      throw UsageError("categorical action " + std::to_string(a) + " outside [0, " +
                       std::to_string(log_probs_.size()) + ")");
    }
    return log_probs_(a);
  }
  if (action.size() != mean_.size()) throw UsageError("Gaussian action dimension mismatch");
  Scalar lp = 0.0;
  for (Index i = 0; i < mean_.size(); ++i) lp += gaussian_log_density(action(i), mean_(i), sigma_(i));
  return lp;
}

Vec ActionDist::log_prob_grad(const Vec& action) const {
  if (!has_raw_) throw UsageError("distribution has no raw head output to differentiate");
  if (kind_ == HeadKind::categorical) {
    const int a = action_index(action);
    if (a < 0 || a >= log_probs_.size()) throw UsageError("categorical action out of range");
    Vec g = -probs();
    g(a) += 1.0;
    return g;
  }
  const Index dim = mean_.size();
  Vec g(2 * dim);
  for (Index i = 0; i < dim; ++i) {
    const Scalar diff = action(i) - mean_(i);
    const Scalar s = sigma_(i);
    g(i) = diff / (s * s) * dmean_dpre_(i);
    const Scalar dlp_dsigma = -1.0 / s + diff * diff / (s * s * s);
    g(dim + i) = dlp_dsigma * dsigma_dpre_(i);
  }
  return g;
}

Scalar ActionDist::entropy() const {
  if (kind_ == HeadKind::categorical) {
    Scalar h = 0.0;
    for (Index i = 0; i < log_probs_.size(); ++i) {
      const Scalar p = std::exp(log_probs_(i));
      if (p > 0.0) h -= p * log_probs_(i);
    }
    return h;
  }
  Scalar h = 0.0;
  for (Index i = 0; i < sigma_.size(); ++i) h += gaussian_entropy(sigma_(i));
  return h;
}

Vec ActionDist::entropy_grad() const {
  if (!has_raw_) throw UsageError("distribution has no raw head output to differentiate");
  if (kind_ == HeadKind::categorical) {
    // dH/dz_i = -p_i (log p_i + H)
    const Scalar h = entropy();
    const Vec p = probs();
    return (-p.array() * (log_probs_.array() + h)).matrix();
  }
  const Index dim = mean_.size();
  Vec g = Vec::Zero(2 * dim);
  for (Index i = 0; i < dim; ++i) g(dim + i) = dsigma_dpre_(i) / sigma_(i);
  return g;
}

std::pair<Vec, Scalar> ActionDist::sample(Rng& rng) const {
  if (kind_ == HeadKind::categorical) {
    std::uniform_real_distribution<Scalar> unif(0.0, 1.0);
    const Scalar u = unif(rng);
    Scalar cum = 0.0;
    Index chosen = log_probs_.size() - 1;
    for (Index i = 0; i < log_probs_.size(); ++i) {
      cum += std::exp(log_probs_(i));
      if (u < cum) {
        chosen = i;
        break;
      }
    }
    // Never return a zero-mass action from rounding in the tail.
    while (chosen > 0 && std::exp(log_probs_(chosen)) == 0.0) --chosen;
    return {discrete_action(static_cast<int>(chosen)), log_probs_(chosen)};
  }
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Vec u(mean_.size());
  for (Index i = 0; i < mean_.size(); ++i) u(i) = mean_(i) + sigma_(i) * normal(rng);
  return {u, log_prob(u)};
}

Vec ActionDist::greedy() const {
  if (kind_ == HeadKind::categorical) {
    Index best = 0;
    log_probs_.maxCoeff(&best);
    return discrete_action(static_cast<int>(best));
  }
  return mean_;
}

}  // namespace mcem::policy

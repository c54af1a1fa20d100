#include "mcem/critic/mixer.hpp"

namespace mcem::critic {

MixerMode parse_mixer_mode(std::string_view name) {
  if (name == "ncd" || name == "ncd_monotonic") return MixerMode::ncd_monotonic;
  if (name == "linear") return MixerMode::linear;
  throw ConfigError("unknown mixer mode '" + std::string(name) + "' (expected ncd|linear)");
}

std::string to_string(MixerMode mode) { return mode == MixerMode::linear ? "linear" : "ncd"; }

void MixerConfig::validate() const {
  if (num_agents < 1) throw ConfigError("mixer needs at least one agent");
  if (state_dim < 1 || embed_dim < 1 || hyper_hidden < 1) throw ConfigError("mixer sizes must be positive");
  if (!(linear_epsilon > 0.0)) throw ConfigError("linear mixer epsilon must be positive");
}

namespace {

Scalar sign(Scalar v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
Scalar elu(Scalar v) { return v > 0.0 ? v : std::expm1(v); }
Scalar elu_grad(Scalar v) { return v > 0.0 ? 1.0 : std::exp(v); }

}  // namespace

Mixer::Mixer(MixerConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const Index k = config_.num_agents;
  const Index s = config_.state_dim;
  const Index e = config_.embed_dim;
  const Index h = config_.hyper_hidden;
  const auto act = config_.hyper_activation;
  if (config_.mode == MixerMode::ncd_monotonic) {
    hyper_w1_ = approx::Mlp("hyper_w1.", {s, h, k * e}, act);
    hyper_b1_ = approx::Mlp("hyper_b1.", {s, e}, act);
    hyper_w2_ = approx::Mlp("hyper_w2.", {s, h, e}, act);
    hyper_b2_ = approx::Mlp("hyper_b2.", {s, e, 1}, act);
  } else {
    hyper_w1_ = approx::Mlp("hyper_w.", {s, h, k}, act);
    hyper_b2_ = approx::Mlp("hyper_b.", {s, h, 1}, act);
  }
  Rng rng(seed);
  hyper_w1_.init(params_, rng);
  if (config_.mode == MixerMode::ncd_monotonic) {
    hyper_b1_.init(params_, rng);
    hyper_w2_.init(params_, rng);
  }
  hyper_b2_.init(params_, rng);
}

Mixer::Conditioning Mixer::condition(const Mat& states, bool trace) const {
  if (states.rows() != config_.state_dim) {
    throw ConfigError("mixer state has " + std::to_string(states.rows()) + " rows, expected " +
                      std::to_string(config_.state_dim));
  }
  Conditioning c;
  c.states = states;
  c.traced = trace;
  c.w1_raw = hyper_w1_.forward(params_, states, trace ? &c.tw1 : nullptr);
  c.b2 = hyper_b2_.forward(params_, states, trace ? &c.tb2 : nullptr);
  if (config_.mode == MixerMode::ncd_monotonic) {
    c.b1 = hyper_b1_.forward(params_, states, trace ? &c.tb1 : nullptr);
    c.w2_raw = hyper_w2_.forward(params_, states, trace ? &c.tw2 : nullptr);
  }
  return c;
}

Scalar Mixer::mix_one(const Conditioning& c, Index col, const Eigen::Ref<const Vec>& q) const {
  const Index k = config_.num_agents;
  if (q.size() != k) throw UsageError("mixer expects one local value per agent");
  if (config_.mode == MixerMode::linear) {
    const Vec w = c.w1_raw.col(col).cwiseAbs().array() + config_.linear_epsilon;
    return w.dot(q) + c.b2(0, col);
  }
  const Index e = config_.embed_dim;
  Scalar out = c.b2(0, col);
  for (Index j = 0; j < e; ++j) {
    Scalar pre = c.b1(j, col);
    for (Index a = 0; a < k; ++a) pre += std::abs(c.w1_raw(j + a * e, col)) * q(a);
    out += std::abs(c.w2_raw(j, col)) * elu(pre);
  }
  return out;
}

Vec Mixer::mix_at(const Conditioning& cond, Index col, const Mat& qs) const {
  Vec out(qs.cols());
  for (Index i = 0; i < qs.cols(); ++i) out(i) = mix_one(cond, col, qs.col(i));
  return out;
}

Vec Mixer::mix_steps(const Conditioning& cond, const Mat& qs) const {
  if (qs.cols() != cond.steps()) throw UsageError("mix_steps: one local-value column per state");
  Vec out(qs.cols());
  for (Index t = 0; t < qs.cols(); ++t) out(t) = mix_one(cond, t, qs.col(t));
  return out;
}

Scalar Mixer::mix(const Vec& local_qs, const Vec& state) const {
  const Conditioning c = condition(state);
  return mix_one(c, 0, local_qs);
}

Mat Mixer::backward(const Conditioning& c, const Mat& qs, const Vec& dq_tot) {
  if (!c.traced) throw UsageError("Mixer::backward needs a traced conditioning");
  const Index k = config_.num_agents;
  const Index steps = c.steps();
  if (qs.cols() != steps || dq_tot.size() != steps) throw UsageError("Mixer::backward shape mismatch");
  Mat dqs = Mat::Zero(k, steps);
  Mat d_w1 = Mat::Zero(c.w1_raw.rows(), steps);
  Mat d_b2 = dq_tot.transpose();
  if (config_.mode == MixerMode::linear) {
    for (Index t = 0; t < steps; ++t) {
      for (Index a = 0; a < k; ++a) {
        const Scalar raw = c.w1_raw(a, t);
        dqs(a, t) = dq_tot(t) * (std::abs(raw) + config_.linear_epsilon);
        d_w1(a, t) = dq_tot(t) * qs(a, t) * sign(raw);
      }
    }
    hyper_w1_.backward(params_, c.tw1, d_w1);
    hyper_b2_.backward(params_, c.tb2, d_b2);
    return dqs;
  }
  const Index e = config_.embed_dim;
  Mat d_b1 = Mat::Zero(e, steps);
  Mat d_w2 = Mat::Zero(e, steps);
  for (Index t = 0; t < steps; ++t) {
    const Scalar g = dq_tot(t);
    if (g == 0.0) continue;
    for (Index j = 0; j < e; ++j) {
      Scalar pre = c.b1(j, t);
      for (Index a = 0; a < k; ++a) pre += std::abs(c.w1_raw(j + a * e, t)) * qs(a, t);
      const Scalar w2 = c.w2_raw(j, t);
      d_w2(j, t) = g * elu(pre) * sign(w2);
      const Scalar d_pre = g * std::abs(w2) * elu_grad(pre);
      d_b1(j, t) = d_pre;
      for (Index a = 0; a < k; ++a) {
        const Scalar raw = c.w1_raw(j + a * e, t);
        d_w1(j + a * e, t) = d_pre * qs(a, t) * sign(raw);
        dqs(a, t) += d_pre * std::abs(raw);
      }
    }
  }
  hyper_w1_.backward(params_, c.tw1, d_w1);
  hyper_b1_.backward(params_, c.tb1, d_b1);
  hyper_w2_.backward(params_, c.tw2, d_w2);
  hyper_b2_.backward(params_, c.tb2, d_b2);
  return dqs;
}

Vec Mixer::local_gradient(const Conditioning& c, Index col, const Vec& q) const {
  const Index k = config_.num_agents;
  if (config_.mode == MixerMode::linear) {
    return (c.w1_raw.col(col).cwiseAbs().array() + config_.linear_epsilon).matrix();
  }
  const Index e = config_.embed_dim;
  Vec g = Vec::Zero(k);
  for (Index j = 0; j < e; ++j) {
    Scalar pre = c.b1(j, col);
    for (Index a = 0; a < k; ++a) pre += std::abs(c.w1_raw(j + a * e, col)) * q(a);
    const Scalar d_pre = std::abs(c.w2_raw(j, col)) * elu_grad(pre);
    for (Index a = 0; a < k; ++a) g(a) += d_pre * std::abs(c.w1_raw(j + a * e, col));
  }
  return g;
}

std::pair<Vec, Scalar> Mixer::linear_weights(const Vec& state) const {
  if (config_.mode != MixerMode::linear) throw UsageError("linear_weights requires the linear mixer mode");
  const Conditioning c = condition(state);
  Vec w = (c.w1_raw.col(0).cwiseAbs().array() + config_.linear_epsilon).matrix();
  return {w, c.b2(0, 0)};
}

}  // namespace mcem::critic

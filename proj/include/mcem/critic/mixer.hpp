#pragma once

#include "mcem/approx/network.hpp"

#include <string_view>

namespace mcem::critic {

enum class MixerMode { ncd_monotonic, linear };

MixerMode parse_mixer_mode(std::string_view name);
std::string to_string(MixerMode mode);

struct MixerConfig {
  MixerMode mode = MixerMode::ncd_monotonic;
  Index num_agents = 1;
  Index state_dim = 1;
  Index embed_dim = 32;
  Index hyper_hidden = 64;
  approx::Activation hyper_activation = approx::Activation::elu;
  Scalar linear_epsilon = 1e-3;

  void validate() const;
};

/// Maps local values Q^1..Q^k to Q_tot, conditioned on a global state through hypernetworks.
///
/// ncd_monotonic: q_tot = |W2(s)|^T elu(|W1(s)| q + b1(s)) + b2(s), so dq_tot/dQ^a >= 0.
/// linear:        q_tot = sum_a (|w_a(s)| + eps) Q^a + b(s).
class Mixer {
 public:
  /// Hypernetwork outputs for a batch of states (one column per state).
  struct Conditioning {
    Mat states;
    Mat w1_raw;  // (k * embed) x T, column-major embed x k per column; linear: k x T
    Mat b1;      // embed x T;                                             linear: unused
    Mat w2_raw;  // embed x T
    Mat b2;      // 1 x T;                                                  linear: b
    approx::Mlp::Trace tw1, tb1, tw2, tb2;
    bool traced = false;

    Index steps() const { return states.cols(); }
  };

  Mixer() = default;
  Mixer(MixerConfig config, std::uint64_t seed);

  const MixerConfig& config() const { return config_; }
  MixerMode mode() const { return config_.mode; }
  approx::ParamStore& params() { return params_; }
  const approx::ParamStore& params() const { return params_; }

  Conditioning condition(const Mat& states, bool trace = false) const;

  /// q_tot for column `col` of the conditioning and each column of `qs` (k x N).
  Vec mix_at(const Conditioning& cond, Index col, const Mat& qs) const;
  /// q_tot for every step t, local values taken from column t of `qs` (k x T).
  Vec mix_steps(const Conditioning& cond, const Mat& qs) const;
  Scalar mix(const Vec& local_qs, const Vec& state) const;

  /// Accumulates d loss/d psi for upstream `dq_tot` (one per step); returns d loss / d qs.
  Mat backward(const Conditioning& cond, const Mat& qs, const Vec& dq_tot);

  /// dq_tot / dQ^a at one column.
  Vec local_gradient(const Conditioning& cond, Index col, const Vec& local_qs) const;

  /// Effective weights w^a(s) and bias b(s) of the linear mode.
  std::pair<Vec, Scalar> linear_weights(const Vec& state) const;

 private:
  Scalar mix_one(const Conditioning& cond, Index col, const Eigen::Ref<const Vec>& q) const;

  MixerConfig config_;
  approx::ParamStore params_;
  approx::Mlp hyper_w1_, hyper_b1_, hyper_w2_, hyper_b2_;
};

/// Convenience wrapper: q_tot for a single (local values, state) pair.
inline Scalar mix(const Mixer& mixer, const Vec& local_qs, const Vec& state) { return mixer.mix(local_qs, state); }

}  // namespace mcem::critic

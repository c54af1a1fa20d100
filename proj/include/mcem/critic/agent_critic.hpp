#pragma once

#include "mcem/approx/network.hpp"

#include <optional>
#include <span>

namespace mcem::critic {

/// Local action-value Q^a(tau^a, u^a; phi^a).
///
/// Discrete critics emit one value per action and index it; continuous critics take the
/// (box-clipped) action as an extra head input and emit a scalar.
class AgentCritic {
 public:
  struct ActionBox {
    Scalar low = -1.0;
    Scalar high = 1.0;
  };

  AgentCritic() = default;
  /// `body.layer_sizes.back()` is overwritten with |U| (discrete) or 1 (continuous).
  AgentCritic(bool discrete, Index action_size, approx::NetSpec body, std::uint64_t seed,
              std::optional<ActionBox> box = std::nullopt);

  bool discrete() const { return discrete_; }
  Index action_size() const { return action_size_; }
  const approx::Network& network() const { return net_; }
  approx::ParamStore& params() { return params_; }
  const approx::ParamStore& params() const { return params_; }

  Mat encode(const Mat& inputs, approx::Network::EncodeTrace* trace = nullptr) const {
    return net_.encode(params_, inputs, trace);
  }

  Scalar q(const Vec& encoding, const Vec& action) const;
  /// Q for several candidate actions at one encoding.
  Vec q_batch(const Vec& encoding, std::span<const Vec> actions) const;
  /// All action values at one encoding (discrete critics only).
  Vec q_values(const Vec& encoding) const;

  /// Q(tau_t, u_t) for every column t; `actions` is action-size x T (index row for discrete).
  Vec q_sequence(const Mat& encodings, const Mat& actions, approx::Mlp::Trace* trace = nullptr) const;
  /// Accumulates d loss / d phi for per-step upstream `dq`; returns d loss / d encodings.
  Mat backprop_q(const approx::Mlp::Trace& trace, const Mat& encodings, const Mat& actions, const Vec& dq);

 private:
  Mat clip(const Mat& actions) const;

  bool discrete_ = true;
  Index action_size_ = 0;
  std::optional<ActionBox> box_;
  approx::Network net_;
  approx::ParamStore params_;
};

}  // namespace mcem::critic

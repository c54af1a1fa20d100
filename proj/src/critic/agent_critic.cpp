#include "mcem/critic/agent_critic.hpp"

namespace mcem::critic {

AgentCritic::AgentCritic(bool discrete, Index action_size, approx::NetSpec body, std::uint64_t seed,
                         std::optional<ActionBox> box)
    : discrete_(discrete), action_size_(action_size), box_(box) {
  if (action_size <= 0) throw ConfigError("critic action size must be positive");
  if (body.layer_sizes.size() < 2) throw ConfigError("critic body needs input and output sizes");
  body.layer_sizes.back() = discrete ? action_size : 1;
  body.extra_input = discrete ? 0 : action_size;
  net_ = approx::Network(std::move(body));
  net_.init(params_, seed);
}

Mat AgentCritic::clip(const Mat& actions) const {
  if (!box_) return actions;
  return actions.cwiseMax(box_->low).cwiseMin(box_->high);
}

Scalar AgentCritic::q(const Vec& encoding, const Vec& action) const {
  if (discrete_) {
    const int a = action_index(action);
    if (a < 0 || a >= action_size_) throw UsageError("critic action index out of range");
    return q_values(encoding)(a);
  }
  return net_.head(params_, encoding, clip(action))(0, 0);
}

Vec AgentCritic::q_batch(const Vec& encoding, std::span<const Vec> actions) const {
  const auto n = static_cast<Index>(actions.size());
  Vec out(n);
  if (discrete_) {
    const Vec all = q_values(encoding);
    for (Index i = 0; i < n; ++i) {
      const int a = action_index(actions[static_cast<std::size_t>(i)]);
      if (a < 0 || a >= action_size_) throw UsageError("critic action index out of range");
      out(i) = all(a);
    }
    return out;
  }
  Mat enc(encoding.size(), n);
  Mat act(action_size_, n);
  for (Index i = 0; i < n; ++i) {
    enc.col(i) = encoding;
    act.col(i) = actions[static_cast<std::size_t>(i)];
  }
  return net_.head(params_, enc, clip(act)).row(0).transpose();
}

Vec AgentCritic::q_values(const Vec& encoding) const {
  if (!discrete_) throw UsageError("q_values is only defined for discrete critics");
  return net_.head(params_, encoding, Mat()).col(0);
}

Vec AgentCritic::q_sequence(const Mat& encodings, const Mat& actions, approx::Mlp::Trace* trace) const {
  if (actions.cols() != encodings.cols()) throw UsageError("critic: one action per encoding column");
  if (discrete_) {
    const Mat out = net_.head(params_, encodings, Mat(), trace);
    Vec q(encodings.cols());
    for (Index t = 0; t < encodings.cols(); ++t) {
      const int a = static_cast<int>(actions(0, t));
      if (a < 0 || a >= action_size_) throw UsageError("critic action index out of range");
      q(t) = out(a, t);
    }
    return q;
  }
  return net_.head(params_, encodings, clip(actions), trace).row(0).transpose();
}

Mat AgentCritic::backprop_q(const approx::Mlp::Trace& trace, const Mat& encodings, const Mat& actions, const Vec& dq) {
  Mat d_out;
  if (discrete_) {
    d_out = Mat::Zero(action_size_, encodings.cols());
    for (Index t = 0; t < encodings.cols(); ++t) d_out(static_cast<Index>(actions(0, t)), t) = dq(t);
  } else {
    d_out = dq.transpose();
  }
  const Mat d_in = net_.head_backward(params_, trace, d_out);
  return d_in.topRows(encodings.rows());
}

}  // namespace mcem::critic

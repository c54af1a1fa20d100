#include "mcem/critic/loss.hpp"

namespace mcem::critic {

namespace {

void check_sequence(const CriticSequence& seq, std::size_t agents) {
  if (seq.agent_inputs.size() != agents || seq.actions.size() != agents) {
    throw UsageError("critic sequence must carry inputs and actions for every agent");
  }
  if (seq.targets.size() != seq.states.cols()) throw UsageError("critic sequence: one target per step");
}

}  // namespace

Vec predict_q_tot(const CriticSequence& seq, std::span<const AgentCritic> critics, const Mixer& mixer) {
  check_sequence(seq, critics.size());
  const Index steps = seq.states.cols();
  Mat qs(static_cast<Index>(critics.size()), steps);
  for (std::size_t a = 0; a < critics.size(); ++a) {
    const Mat enc = critics[a].encode(seq.agent_inputs[a]);
    qs.row(static_cast<Index>(a)) = critics[a].q_sequence(enc, seq.actions[a]).transpose();
  }
  return mixer.mix_steps(mixer.condition(seq.states), qs);
}

LossResult critic_loss(std::span<const CriticSequence> batch, std::span<AgentCritic> critics, Mixer& mixer,
                       bool accumulate) {
  LossResult result;
  for (const auto& seq : batch) {
    check_sequence(seq, critics.size());
    result.count += seq.states.cols();
  }
  if (result.count == 0) return result;
  const Scalar scale = 1.0 / static_cast<Scalar>(result.count);

  for (const auto& seq : batch) {
    const Index steps = seq.states.cols();
    if (steps == 0) continue;
    const auto k = critics.size();
    std::vector<approx::Network::EncodeTrace> enc_traces(k);
    std::vector<approx::Mlp::Trace> head_traces(k);
    std::vector<Mat> encodings(k);
    Mat qs(static_cast<Index>(k), steps);
    for (std::size_t a = 0; a < k; ++a) {
      encodings[a] = critics[a].encode(seq.agent_inputs[a], accumulate ? &enc_traces[a] : nullptr);
      qs.row(static_cast<Index>(a)) =
          critics[a].q_sequence(encodings[a], seq.actions[a], accumulate ? &head_traces[a] : nullptr).transpose();
    }
    const Mixer::Conditioning cond = mixer.condition(seq.states, accumulate);
    const Vec q_tot = mixer.mix_steps(cond, qs);
    const Vec residual = seq.targets - q_tot;
    result.loss += residual.squaredNorm() * scale;
    if (!accumulate) continue;

    const Vec dq_tot = -2.0 * scale * residual;
    const Mat dqs = mixer.backward(cond, qs, dq_tot);
    for (std::size_t a = 0; a < k; ++a) {
      const Mat d_enc = critics[a].backprop_q(head_traces[a], encodings[a], seq.actions[a],
                                              dqs.row(static_cast<Index>(a)).transpose());
      critics[a].network().encode_backward(critics[a].params(), enc_traces[a], d_enc);
    }
  }
  return result;
}

}  // namespace mcem::critic

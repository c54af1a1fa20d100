#pragma once

#include "mcem/approx/activation.hpp"
#include "mcem/approx/param_store.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mcem::approx {

/// Architecture of an agent / critic / hypernetwork body.
///
/// `layer_sizes` = {input, hidden..., output}. When `recurrent` is set a gated
/// recurrent cell of `hidden_size` units sits between the input and the first
/// dense layer. `extra_input` columns are appended to the encoder output before
/// the dense head (used for the action input of continuous critics).
struct NetSpec {
  std::vector<Index> layer_sizes;
  Activation activation = Activation::elu;
  bool recurrent = false;
  Index hidden_size = 0;
  Index extra_input = 0;

  void validate() const;
  Index input_size() const { return layer_sizes.front(); }
  Index output_size() const { return layer_sizes.back(); }
  Index encoding_size() const { return recurrent ? hidden_size : layer_sizes.front(); }
};

/// Glorot-style uniform bound sqrt(6 / (fan_in + fan_out)).
inline Scalar glorot_bound(Index fan_in, Index fan_out) {
  return std::sqrt(6.0 / static_cast<Scalar>(fan_in + fan_out));
}

/// Dense feed-forward stack. Columns of the input are independent samples.
class Mlp {
 public:
  struct Trace {
    std::vector<Mat> inputs;  // input to each layer
    std::vector<Mat> pre;     // pre-activation of each layer
  };

  Mlp() = default;
  Mlp(std::string prefix, std::vector<Index> sizes, Activation hidden_activation);

  void init(ParamStore& params, Rng& rng) const;
  Mat forward(const ParamStore& params, const Mat& x, Trace* trace = nullptr) const;
  /// Accumulates parameter gradients and returns the gradient w.r.t. the input.
  Mat backward(ParamStore& params, const Trace& trace, const Mat& dy) const;

  Index input_size() const { return sizes_.front(); }
  Index output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  const std::string& weight_name(std::size_t layer) const { return w_names_[layer]; }
  const std::string& bias_name(std::size_t layer) const { return b_names_[layer]; }

 private:
  std::vector<Index> sizes_;
  Activation activation_ = Activation::elu;
  std::vector<std::string> w_names_;
  std::vector<std::string> b_names_;
};

/// Gated recurrent cell:
///   z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
///   n = tanh(Wn x + Un (r*h) + bn), h' = (1 - z) * n + z * h.
class GruCell {
 public:
  struct Trace {
    Mat x;       // in x T
    Mat h_prev;  // H x T
    Mat z, r, n;
  };

  GruCell() = default;
  GruCell(std::string prefix, Index input_size, Index hidden_size);

  void init(ParamStore& params, Rng& rng) const;
  /// Runs the cell over the columns of `x` starting from `h0`; returns H x T hidden states.
  Mat forward(const ParamStore& params, const Mat& x, const Vec& h0, Trace* trace = nullptr) const;
  /// Backpropagation through time. `dh` holds the loss gradient w.r.t. every emitted state.
  Mat backward(ParamStore& params, const Trace& trace, const Mat& dh) const;

  Index hidden_size() const { return hidden_; }

 private:
  std::string prefix_;
  Index input_ = 0;
  Index hidden_ = 0;
};

/// Optional recurrent encoder followed by a dense head.
class Network {
 public:
  struct EncodeTrace {
    GruCell::Trace gru;
    bool valid = false;
  };

  struct Context {
    EncodeTrace encode;
    Mlp::Trace head;
    Index encoding_rows = 0;
    bool valid = false;
  };

  struct Output {
    Vec output;
    std::optional<Vec> hidden;
  };

  Network() = default;
  explicit Network(NetSpec spec, std::string prefix = "");

  const NetSpec& spec() const { return spec_; }
  const std::string& prefix() const { return prefix_; }

  /// Adds this network's tensors to `params`: weights U(-b, b) with the Glorot bound, biases zero.
  void init(ParamStore& params, std::uint64_t seed) const;

  /// Encodes a sequence (columns = time steps). Identity when not recurrent.
  Mat encode(const ParamStore& params, const Mat& inputs, EncodeTrace* trace = nullptr) const;
  Mat encode_backward(ParamStore& params, const EncodeTrace& trace, const Mat& d_encoding) const;
  /// One encoder step that threads `hidden` (left untouched for non-recurrent nets).
  Vec encode_step(const ParamStore& params, const Vec& input, Vec& hidden) const;

  /// Dense head over columns of `encoding`, with `extra` rows appended (may be empty).
  Mat head(const ParamStore& params, const Mat& encoding, const Mat& extra, Mlp::Trace* trace = nullptr) const;
  /// Returns the gradient w.r.t. the stacked head input [encoding; extra].
  Mat head_backward(ParamStore& params, const Mlp::Trace& trace, const Mat& dy) const;

  /// Single step: output and the next hidden state (recurrent nets only).
  Output forward(const ParamStore& params, const Vec& input, const std::optional<Vec>& hidden = std::nullopt,
                 const Vec& extra = Vec()) const;

  /// Whole-sequence forward that records what `backward` needs.
  Mat forward_sequence(const ParamStore& params, const Mat& inputs, const Mat& extra, Context* context) const;
  /// Accumulates parameter gradients for `upstream` (out x T) and returns d inputs.
  Mat backward(ParamStore& params, const Context& context, const Mat& upstream) const;

 private:
  NetSpec spec_;
  std::string prefix_;
  std::optional<GruCell> gru_;
  Mlp head_;
};

/// Convenience: a fresh store holding one network initialized from `seed`.
ParamStore init_params(const NetSpec& spec, std::uint64_t seed);

}  // namespace mcem::approx

#include "mcem/approx/network.hpp"

#include <utility>

namespace mcem::approx {

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "elu") return Activation::elu;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::elu: return "elu";
    case Activation::identity: return "identity";
  }
  return "identity";
}

void NetSpec::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("NetSpec needs at least input and output sizes");
  for (Index s : layer_sizes) {
    if (s <= 0) throw ConfigError("NetSpec layer sizes must be positive");
  }
  if (recurrent && hidden_size <= 0) throw ConfigError("recurrent NetSpec needs hidden_size > 0");
  if (extra_input < 0) throw ConfigError("NetSpec extra_input must be >= 0");
}

namespace {

void fill_uniform(Mat& m, Scalar bound, Rng& rng) {
  std::uniform_real_distribution<Scalar> dist(-bound, bound);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::string prefix, std::vector<Index> sizes, Activation hidden_activation)
    : sizes_(std::move(sizes)), activation_(hidden_activation) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_names_.push_back(prefix + "fc" + std::to_string(l) + ".W");
    b_names_.push_back(prefix + "fc" + std::to_string(l) + ".b");
  }
}

void Mlp::init(ParamStore& params, Rng& rng) const {
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Mat& w = params.add(w_names_[l], sizes_[l + 1], sizes_[l]);
    fill_uniform(w, glorot_bound(sizes_[l], sizes_[l + 1]), rng);
    params.add(b_names_[l], sizes_[l + 1], 1);
  }
}

Mat Mlp::forward(const ParamStore& params, const Mat& x, Trace* trace) const {
  if (x.rows() != input_size()) {
    throw ConfigError("Mlp input has " + std::to_string(x.rows()) + " rows, expected " +
                      std::to_string(input_size()));
  }
  if (trace) {
    trace->inputs.clear();
    trace->pre.clear();
  }
  Mat h = x;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const Mat& w = params.value(w_names_[l]);
    const Mat& b = params.value(b_names_[l]);
    Mat pre = w * h;
    pre.colwise() += b.col(0);
    const bool last = l + 1 == num_layers();
    if (trace) {
      trace->inputs.push_back(std::move(h));
      trace->pre.push_back(pre);
    }
    h = last ? pre : activate(pre, activation_);
  }
  return h;
}

Mat Mlp::backward(ParamStore& params, const Trace& trace, const Mat& dy) const {
  if (trace.pre.size() != num_layers()) throw UsageError("Mlp::backward without a matching forward trace");
  Mat delta = dy;
  for (std::size_t l = num_layers(); l-- > 0;) {
    if (l + 1 != num_layers()) delta = delta.cwiseProduct(activate_grad(trace.pre[l], activation_));
    params.grad(w_names_[l]).noalias() += delta * trace.inputs[l].transpose();
    params.grad(b_names_[l]) += delta.rowwise().sum();
    delta = params.value(w_names_[l]).transpose() * delta;
  }
  return delta;
}

// ---------------------------------------------------------------------------
// GruCell

GruCell::GruCell(std::string prefix, Index input_size, Index hidden_size)
    : prefix_(std::move(prefix)), input_(input_size), hidden_(hidden_size) {}

void GruCell::init(ParamStore& params, Rng& rng) const {
  for (const char* gate : {"z", "r", "n"}) {
    Mat& w = params.add(prefix_ + "gru.W" + gate, hidden_, input_);
    fill_uniform(w, glorot_bound(input_, hidden_), rng);
    Mat& u = params.add(prefix_ + "gru.U" + gate, hidden_, hidden_);
    fill_uniform(u, glorot_bound(hidden_, hidden_), rng);
    params.add(prefix_ + "gru.b" + gate, hidden_, 1);
  }
}

Mat GruCell::forward(const ParamStore& params, const Mat& x, const Vec& h0, Trace* trace) const {
  if (x.rows() != input_) throw ConfigError("GRU input size mismatch");
  if (h0.size() != hidden_) throw ConfigError("GRU hidden size mismatch");
  const Mat& wz = params.value(prefix_ + "gru.Wz");
  const Mat& uz = params.value(prefix_ + "gru.Uz");
  const Mat& bz = params.value(prefix_ + "gru.bz");
  const Mat& wr = params.value(prefix_ + "gru.Wr");
  const Mat& ur = params.value(prefix_ + "gru.Ur");
  const Mat& br = params.value(prefix_ + "gru.br");
  const Mat& wn = params.value(prefix_ + "gru.Wn");
  const Mat& un = params.value(prefix_ + "gru.Un");
  const Mat& bn = params.value(prefix_ + "gru.bn");

  const Index steps = x.cols();
  Mat out(hidden_, steps);
  if (trace) {
    trace->x = x;
    trace->h_prev.resize(hidden_, steps);
    trace->z.resize(hidden_, steps);
    trace->r.resize(hidden_, steps);
    trace->n.resize(hidden_, steps);
  }
  Vec h = h0;
  for (Index t = 0; t < steps; ++t) {
    const Vec xt = x.col(t);
    const Vec z = (wz * xt + uz * h + bz.col(0)).unaryExpr([](Scalar v) { return sigmoid(v); });
    const Vec r = (wr * xt + ur * h + br.col(0)).unaryExpr([](Scalar v) { return sigmoid(v); });
    const Vec n = (wn * xt + un * r.cwiseProduct(h) + bn.col(0)).array().tanh().matrix();
    if (trace) {
      trace->h_prev.col(t) = h;
      trace->z.col(t) = z;
      trace->r.col(t) = r;
      trace->n.col(t) = n;
    }
    h = (Vec::Ones(hidden_) - z).cwiseProduct(n) + z.cwiseProduct(h);
    out.col(t) = h;
  }
  return out;
}

Mat GruCell::backward(ParamStore& params, const Trace& trace, const Mat& dh) const {
  if (trace.x.cols() != dh.cols() || dh.rows() != hidden_) {
    throw UsageError("GruCell::backward without a matching forward trace");
  }
  const Mat& wz = params.value(prefix_ + "gru.Wz");
  const Mat& uz = params.value(prefix_ + "gru.Uz");
  const Mat& wr = params.value(prefix_ + "gru.Wr");
  const Mat& ur = params.value(prefix_ + "gru.Ur");
  const Mat& wn = params.value(prefix_ + "gru.Wn");
  const Mat& un = params.value(prefix_ + "gru.Un");
  Mat& gwz = params.grad(prefix_ + "gru.Wz");
  Mat& guz = params.grad(prefix_ + "gru.Uz");
  Mat& gbz = params.grad(prefix_ + "gru.bz");
  Mat& gwr = params.grad(prefix_ + "gru.Wr");
  Mat& gur = params.grad(prefix_ + "gru.Ur");
  Mat& gbr = params.grad(prefix_ + "gru.br");
  Mat& gwn = params.grad(prefix_ + "gru.Wn");
  Mat& gun = params.grad(prefix_ + "gru.Un");
  Mat& gbn = params.grad(prefix_ + "gru.bn");

  const Index steps = trace.x.cols();
  Mat dx = Mat::Zero(input_, steps);
  Vec carry = Vec::Zero(hidden_);
  for (Index t = steps; t-- > 0;) {
    const Vec dnext = dh.col(t) + carry;
    const Vec h = trace.h_prev.col(t);
    const Vec z = trace.z.col(t);
    const Vec r = trace.r.col(t);
    const Vec n = trace.n.col(t);
    const Vec xt = trace.x.col(t);

    const Vec dn = dnext.cwiseProduct(Vec::Ones(hidden_) - z);
    const Vec dz = dnext.cwiseProduct(h - n);
    Vec dh_prev = dnext.cwiseProduct(z);

    const Vec da_n = dn.cwiseProduct((Vec::Ones(hidden_) - n.cwiseProduct(n)));
    const Vec rh = r.cwiseProduct(h);
    gwn.noalias() += da_n * xt.transpose();
    gun.noalias() += da_n * rh.transpose();
    gbn.col(0) += da_n;
    const Vec drh = un.transpose() * da_n;
    const Vec dr = drh.cwiseProduct(h);
    dh_prev += drh.cwiseProduct(r);

    const Vec da_z = dz.cwiseProduct(z.cwiseProduct(Vec::Ones(hidden_) - z));
    gwz.noalias() += da_z * xt.transpose();
    guz.noalias() += da_z * h.transpose();
    gbz.col(0) += da_z;
    dh_prev.noalias() += uz.transpose() * da_z;

    const Vec da_r = dr.cwiseProduct(r.cwiseProduct(Vec::Ones(hidden_) - r));
    gwr.noalias() += da_r * xt.transpose();
    gur.noalias() += da_r * h.transpose();
    gbr.col(0) += da_r;
    dh_prev.noalias() += ur.transpose() * da_r;

    dx.col(t) = wn.transpose() * da_n + wz.transpose() * da_z + wr.transpose() * da_r;
    carry = dh_prev;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(NetSpec spec, std::string prefix) : spec_(std::move(spec)), prefix_(std::move(prefix)) {
  spec_.validate();
  std::vector<Index> head_sizes(spec_.layer_sizes.begin() + 1, spec_.layer_sizes.end());
  head_sizes.insert(head_sizes.begin(), spec_.encoding_size() + spec_.extra_input);
  if (spec_.recurrent) gru_ = GruCell(prefix_, spec_.input_size(), spec_.hidden_size);
  head_ = Mlp(prefix_, std::move(head_sizes), spec_.activation);
}

void Network::init(ParamStore& params, std::uint64_t seed) const {
  Rng rng(seed);
  if (gru_) gru_->init(params, rng);
  head_.init(params, rng);
}

Mat Network::encode(const ParamStore& params, const Mat& inputs, EncodeTrace* trace) const {
  if (inputs.rows() != spec_.input_size()) {
    throw ConfigError("network input has " + std::to_string(inputs.rows()) + " rows, expected " +
                      std::to_string(spec_.input_size()));
  }
  if (!gru_) {
    if (trace) trace->valid = true;
    return inputs;
  }
  Mat out = gru_->forward(params, inputs, Vec::Zero(spec_.hidden_size), trace ? &trace->gru : nullptr);
  if (trace) trace->valid = true;
  return out;
}

Mat Network::encode_backward(ParamStore& params, const EncodeTrace& trace, const Mat& d_encoding) const {
  if (!trace.valid) throw UsageError("encode_backward called without a forward trace");
  if (!gru_) return d_encoding;
  return gru_->backward(params, trace.gru, d_encoding);
}

Vec Network::encode_step(const ParamStore& params, const Vec& input, Vec& hidden) const {
  if (input.size() != spec_.input_size()) throw ConfigError("network input size mismatch");
  if (!gru_) return input;
  if (hidden.size() != spec_.hidden_size) hidden = Vec::Zero(spec_.hidden_size);
  hidden = gru_->forward(params, input, hidden).col(0);
  return hidden;
}

Mat Network::head(const ParamStore& params, const Mat& encoding, const Mat& extra, Mlp::Trace* trace) const {
  if (spec_.extra_input == 0) return head_.forward(params, encoding, trace);
  if (extra.rows() != spec_.extra_input || extra.cols() != encoding.cols()) {
    throw ConfigError("network extra input shape mismatch");
  }
  Mat stacked(encoding.rows() + extra.rows(), encoding.cols());
  stacked << encoding, extra;
  return head_.forward(params, stacked, trace);
}

Mat Network::head_backward(ParamStore& params, const Mlp::Trace& trace, const Mat& dy) const {
  return head_.backward(params, trace, dy);
}

Network::Output Network::forward(const ParamStore& params, const Vec& input, const std::optional<Vec>& hidden,
                                 const Vec& extra) const {
  if (input.size() != spec_.input_size()) throw ConfigError("network input size mismatch");
  Output out;
  Mat enc;
  if (gru_) {
    const Vec h0 = hidden ? *hidden : Vec::Zero(spec_.hidden_size);
    enc = gru_->forward(params, input, h0);
    out.hidden = Vec(enc.col(0));
  } else {
    enc = input;
  }
  out.output = head(params, enc, extra.size() ? Mat(extra) : Mat(0, 1)).col(0);
  return out;
}

Mat Network::forward_sequence(const ParamStore& params, const Mat& inputs, const Mat& extra, Context* context) const {
  Mat enc = encode(params, inputs, context ? &context->encode : nullptr);
  Mat out = head(params, enc, extra, context ? &context->head : nullptr);
  if (context) {
    context->encoding_rows = enc.rows();
    context->valid = true;
  }
  return out;
}

Mat Network::backward(ParamStore& params, const Context& context, const Mat& upstream) const {
  if (!context.valid) throw UsageError("Network::backward called without a forward context");
  const Mat d_stacked = head_backward(params, context.head, upstream);
  return encode_backward(params, context.encode, d_stacked.topRows(context.encoding_rows));
}

ParamStore init_params(const NetSpec& spec, std::uint64_t seed) {
  ParamStore store;
  Network(spec).init(store, seed);
  return store;
}

}  // namespace mcem::approx

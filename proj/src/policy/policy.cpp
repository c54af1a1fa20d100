#include "mcem/policy/policy.hpp"

namespace mcem::policy {

StochasticPolicy::StochasticPolicy(HeadKind kind, Index action_size, approx::NetSpec body, std::uint64_t seed,
                                   GaussianBounds bounds)
    : kind_(kind), action_size_(action_size), bounds_(bounds) {
  if (action_size <= 0) throw ConfigError("policy action size must be positive");
  if (bounds.min <= 0.0 || bounds.max <= bounds.min) throw ConfigError("invalid sigma bounds");
  if (body.layer_sizes.size() < 2) throw ConfigError("policy body needs input and output sizes");
  body.layer_sizes.back() = raw_size();
  body.extra_input = 0;
  net_ = approx::Network(std::move(body));
  net_.init(params_, seed);
}

ActionDist StochasticPolicy::make_dist(const Vec& raw) const {
  return kind_ == HeadKind::categorical ? ActionDist::categorical(raw) : ActionDist::gaussian(raw, bounds_);
}

ActionDist StochasticPolicy::distribution(const Vec& encoding) const {
  const Mat raw = net_.head(params_, encoding, Mat());
  return make_dist(raw.col(0));
}

std::vector<ActionDist> StochasticPolicy::distributions(const Mat& encodings) const {
  const Mat raw = net_.head(params_, encodings, Mat());
  std::vector<ActionDist> out;
  out.reserve(static_cast<std::size_t>(raw.cols()));
  for (Index t = 0; t < raw.cols(); ++t) out.push_back(make_dist(raw.col(t)));
  return out;
}

Mat StochasticPolicy::backprop_head(const Mat& encodings, const Mat& d_raw) {
  if (d_raw.rows() != raw_size() || d_raw.cols() != encodings.cols()) {
    throw UsageError("backprop_head: gradient shape mismatch");
  }
  approx::Mlp::Trace trace;
  net_.head(params_, encodings, Mat(), &trace);
  return net_.head_backward(params_, trace, d_raw);
}

void StochasticPolicy::backprop_encoder(const approx::Network::EncodeTrace& trace, const Mat& d_encoding) {
  net_.encode_backward(params_, trace, d_encoding);
}

PolicyPair make_policy_pair(HeadKind kind, Index action_size, const approx::NetSpec& body, std::uint64_t seed,
                            Scalar entropy_coeff, GaussianBounds bounds) {
  if (entropy_coeff < 0.0) throw ConfigError("entropy coefficient must be nonnegative");
  PolicyPair pair{StochasticPolicy(kind, action_size, body, seed, bounds),
                  StochasticPolicy(kind, action_size, body, seed ^ 0x9e3779b97f4a7c15ULL, bounds), entropy_coeff};
  return pair;
}

std::pair<Vec, Scalar> sample_action(const StochasticPolicy& head, const Vec& encoding, Rng& rng) {
  return head.distribution(encoding).sample(rng);
}

Scalar log_prob(const StochasticPolicy& head, const Vec& encoding, const Vec& action) {
  return head.distribution(encoding).log_prob(action);
}

Scalar entropy(const StochasticPolicy& head, const Vec& encoding) { return head.distribution(encoding).entropy(); }

}  // namespace mcem::policy

#include "mcem/oracle/oracle.hpp"

#include <cmath>

namespace mcem::oracle {

namespace {

int first_argmax(const Vec& v) {
  int best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

IgmResult igm_check(const critic::Mixer& mixer, std::span<const Vec> local_q, const Vec& state, std::size_t max_joint) {
  const std::size_t k = local_q.size();
  if (k == 0) throw UsageError("igm_check needs at least one agent");
  std::size_t joint = 1;
  for (const Vec& q : local_q) {
    if (q.size() == 0) throw UsageError("igm_check: empty local table");
    joint *= static_cast<std::size_t>(q.size());
    if (joint > max_joint) {
      throw UsageError("igm_check: joint action space exceeds " + std::to_string(max_joint) +
                       " entries; use a sampled check instead");
    }
  }
  IgmResult out;
  for (const Vec& q : local_q) out.local_argmax.push_back(first_argmax(q));

  std::vector<int> digits(k, 0);
  bool first = true;
  Vec qs(static_cast<Index>(k));
  for (std::size_t n = 0; n < joint; ++n) {
    for (std::size_t a = 0; a < k; ++a) qs(static_cast<Index>(a)) = local_q[a](digits[a]);
    const Scalar value = mixer.mix(qs, state);
    if (first || value > out.global_value) {
      out.global_value = value;
      out.global_argmax = digits;
      first = false;
    }
    // Odometer increment, agent 0 most significant: lexicographic = ascending joint index.
    for (std::size_t a = k; a-- > 0;) {
      if (++digits[a] < local_q[a].size()) break;
      digits[a] = 0;
    }
  }
  out.pass = out.global_argmax == out.local_argmax;
  return out;
}

std::vector<std::size_t> quantile_oracle(std::span<const Scalar> values, Scalar rho) {
  if (values.empty()) throw UsageError("quantile_oracle: empty value list");
  const std::size_t n = values.size();
  const auto raw = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - rho) + 1e-9));
  const std::size_t count = raw < 1 ? 1 : raw;
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best == n || values[i] > values[best]) best = i;
    }
    taken[best] = true;
    out.push_back(best);
  }
  return out;
}

std::map<std::string, Mat> finite_diff(approx::ParamStore& params, const std::function<Scalar()>& objective,
                                       Scalar h) {
  std::map<std::string, Mat> out;
  for (auto& [name, entry] : params.entries()) {
    Mat g(entry.value.rows(), entry.value.cols());
    for (Index i = 0; i < entry.value.size(); ++i) {
      const Scalar orig = entry.value(i);
      entry.value(i) = orig + h;
      const Scalar up = objective();
      entry.value(i) = orig - h;
      const Scalar down = objective();
      entry.value(i) = orig;
      g(i) = (up - down) / (2.0 * h);
    }
    out.emplace(name, std::move(g));
  }
  return out;
}

Vec finite_diff(const Vec& x, const std::function<Scalar(const Vec&)>& objective, Scalar h) {
  Vec g(x.size());
  Vec probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const Scalar up = objective(probe);
    probe(i) = x(i) - h;
    const Scalar down = objective(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Scalar relative_error(Scalar analytic, Scalar numeric, Scalar floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace mcem::oracle

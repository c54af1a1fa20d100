#include "mcem/oracle/gradient_checks.hpp"

#include "mcem/critic/loss.hpp"
#include "mcem/oracle/oracle.hpp"
#include "mcem/policy/mcem.hpp"

#include <cmath>

namespace mcem::oracle {

namespace {

Mat random_mat(Index rows, Index cols, Rng& rng, Scalar scale = 1.0) {
  std::normal_distribution<Scalar> n(0.0, scale);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

approx::NetSpec small_body(Index input, bool recurrent, Rng& rng) {
  std::uniform_int_distribution<int> width(3, 6);
  approx::NetSpec s;
  s.layer_sizes = {input, width(rng), 1};
  s.recurrent = recurrent;
  s.hidden_size = recurrent ? width(rng) : 0;
  return s;
}

void compare(GradCheck& out, const std::string& store, const approx::ParamStore& params,
             const std::map<std::string, Mat>& numeric) {
  for (const auto& [name, num] : numeric) {
    const Mat& ana = params.grad(name);
    for (Index i = 0; i < num.size(); ++i) {
      const Scalar e = relative_error(ana(i), num(i));
      ++out.coordinates;
      if (out.worst.empty() || e > out.max_rel_error) {
        out.max_rel_error = e;
        out.worst = store + ":" + name + "[" + std::to_string(i) + "] analytic=" + std::to_string(ana(i)) +
                    " numeric=" + std::to_string(num(i));
      }
    }
  }
}

struct PolicyProbe {
  policy::StochasticPolicy pol;
  Mat inputs;
  std::vector<policy::EliteSet> elites;  // one per step
};

PolicyProbe make_policy_probe(std::uint64_t seed, policy::HeadKind kind, bool recurrent) {
  Rng rng = make_rng(seed, 501);
  const Index input = 3;
  const Index action = kind == policy::HeadKind::categorical ? 4 : 2;
  PolicyProbe p;
  policy::GaussianBounds bounds;
  if (seed % 2 == 1) {
    bounds.mean_low = -1.0;
    bounds.mean_high = 1.0;
  }
  p.pol = policy::StochasticPolicy(kind, action, small_body(input, recurrent, rng), rng(), bounds);
  const Index T = 3;
  p.inputs = random_mat(input, T, rng);
  const Mat enc = p.pol.encode(p.inputs);
  // Elites are drawn once from a perturbed copy so they are fixed inputs of the objective.
  for (Index t = 0; t < T; ++t) {
    const policy::ActionDist d = p.pol.distribution(enc.col(t));
    std::vector<policy::JointActionSample> samples(4);
    for (auto& s : samples) {
      s.actions.push_back(d.sample(rng).first);
      s.q_tot = std::normal_distribution<Scalar>(0.0, 1.0)(rng);
    }
    p.elites.push_back(policy::select_elites(samples, 0.5));
  }
  return p;
}

Scalar policy_objective(const PolicyProbe& p, Scalar entropy_coeff) {
  const Mat enc = p.pol.encode(p.inputs);
  Scalar total = 0.0;
  for (Index t = 0; t < enc.cols(); ++t) {
    const policy::ActionDist d = p.pol.distribution(enc.col(t));
    for (const auto& e : p.elites[static_cast<std::size_t>(t)].elites) {
      total += d.log_prob(e.actions[0]) + entropy_coeff * d.entropy();
    }
  }
  return total;
}

GradCheck check_policy(std::uint64_t seed, policy::HeadKind kind, bool recurrent, bool proposal, Scalar beta,
                       Scalar h) {
  PolicyProbe p = make_policy_probe(seed, kind, recurrent);
  p.pol.params().zero_grad();
  approx::Network::EncodeTrace trace;
  const Mat enc = p.pol.encode(p.inputs, &trace);
  Mat d_raw(p.pol.raw_size(), enc.cols());
  for (Index t = 0; t < enc.cols(); ++t) {
    const std::vector<policy::ActionDist> d{p.pol.distribution(enc.col(t))};
    const auto& el = p.elites[static_cast<std::size_t>(t)];
    d_raw.col(t) = proposal ? policy::proposal_policy_raw_gradient(d, el, beta)[0]
                            : policy::main_policy_raw_gradient(d, el)[0];
  }
  const Mat d_enc = p.pol.backprop_head(enc, d_raw);
  p.pol.backprop_encoder(trace, d_enc);
  const Scalar coeff = proposal ? beta : 0.0;
  const auto numeric = finite_diff(p.pol.params(), [&] { return policy_objective(p, coeff); }, h);
  GradCheck out;
  compare(out, proposal ? "proposal" : "main", p.pol.params(), numeric);
  return out;
}

}  // namespace

GradCheck check_network_gradient(std::uint64_t seed, bool recurrent, Scalar h) {
  Rng rng = make_rng(seed, 502);
  approx::NetSpec spec = small_body(3, recurrent, rng);
  spec.layer_sizes.back() = 2;
  spec.layer_sizes.insert(spec.layer_sizes.end() - 1, 4);
  approx::Network net(spec);
  approx::ParamStore params;
  net.init(params, rng());
  const Index T = 4;
  const Mat x = random_mat(3, T, rng);
  const Mat up = random_mat(2, T, rng);
  approx::Network::Context ctx;
  net.forward_sequence(params, x, Mat(), &ctx);
  net.backward(params, ctx, up);
  const auto numeric = finite_diff(
      params, [&] { return (net.forward_sequence(params, x, Mat(), nullptr).array() * up.array()).sum(); }, h);
  GradCheck out;
  compare(out, "network", params, numeric);
  return out;
}

GradCheck check_main_policy_gradient(std::uint64_t seed, policy::HeadKind kind, bool recurrent, Scalar h) {
  return check_policy(seed, kind, recurrent, false, 0.0, h);
}

GradCheck check_proposal_policy_gradient(std::uint64_t seed, policy::HeadKind kind, bool recurrent,
                                         Scalar entropy_coeff, Scalar h) {
  return check_policy(seed, kind, recurrent, true, entropy_coeff, h);
}

GradCheck check_centralized_policy_gradient(std::uint64_t seed, policy::HeadKind kind, Scalar h) {
  PolicyProbe p = make_policy_probe(seed, kind, false);
  Rng rng = make_rng(seed, 503);
  const Vec q = random_mat(p.inputs.cols(), 1, rng).col(0);
  p.pol.params().zero_grad();
  const Mat enc = p.pol.encode(p.inputs);
  Mat d_raw(p.pol.raw_size(), enc.cols());
  for (Index t = 0; t < enc.cols(); ++t) {
    const std::vector<policy::ActionDist> d{p.pol.distribution(enc.col(t))};
    const JointAction u{p.elites[static_cast<std::size_t>(t)].elites[0].actions[0]};
    d_raw.col(t) = policy::centralized_policy_raw_gradient(d, u, q(t))[0];
  }
  p.pol.backprop_head(enc, d_raw);
  const auto numeric = finite_diff(
      p.pol.params(),
      [&] {
        const Mat e = p.pol.encode(p.inputs);
        Scalar total = 0.0;
        for (Index t = 0; t < e.cols(); ++t) {
          total += q(t) * p.pol.distribution(e.col(t)).log_prob(p.elites[static_cast<std::size_t>(t)].elites[0].actions[0]);
        }
        return total;
      },
      h);
  GradCheck out;
  compare(out, "centralized", p.pol.params(), numeric);
  return out;
}

GradCheck check_critic_loss_gradient(std::uint64_t seed, critic::MixerMode mode, bool discrete, bool recurrent,
                                     Scalar h) {
  Rng rng = make_rng(seed, 504);
  const Index k = 2;
  const Index input = 3;
  const Index state_dim = 3;
  const Index action = discrete ? 3 : 2;
  std::vector<critic::AgentCritic> critics;
  for (Index a = 0; a < k; ++a) {
    std::optional<critic::AgentCritic::ActionBox> box;
    if (!discrete) box = critic::AgentCritic::ActionBox{-10.0, 10.0};
    critics.emplace_back(discrete, action, small_body(input, recurrent, rng), rng(), box);
  }
  critic::MixerConfig mc;
  mc.mode = mode;
  mc.num_agents = k;
  mc.state_dim = state_dim;
  mc.embed_dim = 4;
  mc.hyper_hidden = 5;
  critic::Mixer mixer(mc, rng());

  std::vector<critic::CriticSequence> batch(2);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(action) - 1);
  for (auto& seq : batch) {
    const Index T = 3;
    for (Index a = 0; a < k; ++a) {
      seq.agent_inputs.push_back(random_mat(input, T, rng));
      if (discrete) {
        Mat u(1, T);
        for (Index t = 0; t < T; ++t) u(0, t) = pick(rng);
        seq.actions.push_back(u);
      } else {
        seq.actions.push_back(random_mat(action, T, rng, 0.5));
      }
    }
    seq.states = random_mat(state_dim, T, rng);
    seq.targets = random_mat(T, 1, rng, 2.0).col(0);
  }
  auto loss = [&] { return critic::critic_loss(batch, critics, mixer, false).loss; };
  for (auto& c : critics) c.params().zero_grad();
  mixer.params().zero_grad();
  critic::critic_loss(batch, critics, mixer, true);

  GradCheck out;
  for (std::size_t a = 0; a < critics.size(); ++a) {
    const auto numeric = finite_diff(critics[a].params(), loss, h);
    compare(out, "critic" + std::to_string(a), critics[a].params(), numeric);
  }
  compare(out, "mixer", mixer.params(), finite_diff(mixer.params(), loss, h));
  return out;
}

}  // namespace mcem::oracle

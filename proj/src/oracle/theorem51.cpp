#include "mcem/approx/adam.hpp"
#include "mcem/oracle/oracle.hpp"
#include "mcem/policy/mcem.hpp"

#include <cmath>

namespace mcem::oracle {

namespace {

Vec plain_softmax(const Vec& logits) {
  double m = logits(0);
  for (Index i = 1; i < logits.size(); ++i) m = std::max(m, logits(i));
  Vec p(logits.size());
  double z = 0.0;
  for (Index i = 0; i < logits.size(); ++i) {
    p(i) = std::exp(logits(i) - m);
    z += p(i);
  }
  for (Index i = 0; i < logits.size(); ++i) p(i) /= z;
  return p;
}

struct Tabular {
  std::vector<approx::ParamStore> logits;
  std::vector<approx::OptimState> opt;

  std::vector<policy::ActionDist> dists() const {
    std::vector<policy::ActionDist> out;
    for (const auto& p : logits) out.push_back(policy::ActionDist::categorical(p.value("logits").col(0)));
    return out;
  }
  std::vector<Vec> probs() const {
    std::vector<Vec> out;
    for (const auto& p : logits) out.push_back(plain_softmax(p.value("logits").col(0)));
    return out;
  }
  void ascend(const std::vector<Vec>& grads) {
    for (std::size_t a = 0; a < logits.size(); ++a) {
      logits[a].grad("logits").col(0) += grads[a];
      approx::adam_update(logits[a], opt[a], true);
    }
  }
};

Tabular make_tabular(const envs::MatrixGameConfig& game, const std::vector<Vec>& init, Scalar lr) {
  Tabular t;
  for (int a = 0; a < game.num_agents; ++a) {
    approx::ParamStore p;
    p.add("logits", game.num_actions, 1) = init[static_cast<std::size_t>(a)];
    t.logits.push_back(std::move(p));
    approx::OptimState o;
    o.learning_rate = lr;
    t.opt.push_back(o);
  }
  return t;
}

}  // namespace

Scalar expected_payoff(const envs::MatrixGameConfig& game, std::span<const Vec> probs) {
  const int k = game.num_agents;
  const int U = game.num_actions;
  if (static_cast<int>(probs.size()) != k) throw UsageError("expected_payoff: one distribution per agent");
  double total = 0.0;
  for (Index j = 0; j < game.payoff.size(); ++j) {
    Index rest = j;
    double p = 1.0;
    for (int a = k - 1; a >= 0; --a) {
      p *= probs[static_cast<std::size_t>(a)](rest % U);
      rest /= U;
    }
    total += p * game.payoff(j);
  }
  return total;
}

std::vector<Theorem51Row> theorem_51_experiment(const envs::MatrixGameConfig& game,
                                                std::span<const std::uint64_t> seeds, const Theorem51Config& config) {
  game.validate();
  if (game.episode_length != 1) throw ConfigError("the matrix-game comparison needs single-step games");
  std::vector<Theorem51Row> rows;
  const auto n = static_cast<std::size_t>(config.samples);
  for (std::uint64_t seed : seeds) {
    Rng init_rng = make_rng(seed, 11);
    std::normal_distribution<Scalar> normal(0.0, config.init_scale);
    std::vector<Vec> init;
    for (int a = 0; a < game.num_agents; ++a) {
      Vec v(game.num_actions);
      for (Index u = 0; u < v.size(); ++u) v(u) = normal(init_rng);
      init.push_back(v);
    }
    Theorem51Row row;
    row.seed = seed;

    Tabular main = make_tabular(game, init, config.learning_rate);
    Tabular proposal = make_tabular(game, init, config.learning_rate);
    Tabular central = make_tabular(game, init, config.learning_rate);
    row.initial = expected_payoff(game, main.probs());

    const policy::QEvaluator payoff = [&](std::span<const JointAction> cands) {
      Vec q(static_cast<Index>(cands.size()));
      for (std::size_t i = 0; i < cands.size(); ++i) q(static_cast<Index>(i)) = game.payoff_at(cands[i]);
      return q;
    };

    Rng mcem_rng = make_rng(seed, 12);
    Rng central_rng = make_rng(seed, 13);
    for (int it = 0; it < config.iterations; ++it) {
      const auto dm = main.dists();
      const auto dp = proposal.dists();
      const policy::EliteSet elites = policy::mcem_elites(dp, payoff, n, config.rho, mcem_rng);
      main.ascend(policy::main_policy_raw_gradient(dm, elites));
      proposal.ascend(policy::proposal_policy_raw_gradient(dp, elites, config.entropy_coeff));

      const auto dc = central.dists();
      std::vector<Vec> g(dc.size());
      for (std::size_t a = 0; a < dc.size(); ++a) g[a] = Vec::Zero(game.num_actions);
      for (const auto& s : policy::sample_joint_actions(dc, n, central_rng)) {
        const auto ga = policy::centralized_policy_raw_gradient(dc, s.actions, game.payoff_at(s.actions));
        for (std::size_t a = 0; a < dc.size(); ++a) g[a] += ga[a] / static_cast<Scalar>(n);
      }
      central.ascend(g);
    }
    row.mcem = expected_payoff(game, main.probs());
    row.centralized = expected_payoff(game, central.probs());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mcem::oracle

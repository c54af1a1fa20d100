#include "mcem/oracle/suites.hpp"

#include "mcem/critic/tabular_operator.hpp"
#include "mcem/critic/trace.hpp"
#include "mcem/oracle/gradient_checks.hpp"
#include "mcem/oracle/oracle.hpp"
#include "mcem/policy/mcem.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace mcem::oracle {

namespace {

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Vec normal_vec(Index n, Scalar scale, Rng& rng) {
  std::normal_distribution<Scalar> nd(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

critic::Mixer random_mixer(Index agents, Index state_dim, Rng& rng) {
  critic::MixerConfig mc;
  mc.mode = critic::MixerMode::ncd_monotonic;
  mc.num_agents = agents;
  mc.state_dim = state_dim;
  mc.embed_dim = 8;
  mc.hyper_hidden = 16;
  critic::Mixer mixer(mc, rng());
  // Spread the hypernetwork weights so that the mixer is far from linear.
  std::normal_distribution<Scalar> nd(0.0, 0.8);
  for (auto& [name, entry] : mixer.params().entries()) {
    for (Index i = 0; i < entry.value.size(); ++i) entry.value(i) = nd(rng);
  }
  return mixer;
}

}  // namespace

bool SuiteResult::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return !checks.empty();
}

SuiteResult igm_suite(int instances, std::uint64_t seed) {
  SuiteResult out{"igm", {}, {}};
  Rng rng = make_rng(seed, 0x196);
  std::uniform_int_distribution<int> agents(2, 3), actions(3, 5), sdim(1, 6);
  for (int i = 0; i < instances; ++i) {
    const int k = agents(rng);
    const int u = actions(rng);
    const critic::Mixer mixer = random_mixer(k, sdim(rng), rng);
    const Vec state = normal_vec(mixer.config().state_dim, 1.0, rng);
    std::vector<Vec> local;
    for (int a = 0; a < k; ++a) local.push_back(normal_vec(u, 2.0, rng));
    const IgmResult r = igm_check(mixer, local, state);
    Check c;
    c.name = "igm instance " + std::to_string(i + 1) + " (k=" + std::to_string(k) + ", |U|=" + std::to_string(u) + ")";
    c.pass = r.pass;
    if (!r.pass) c.diagnostic = "global argmax differs from per-agent argmaxes";
    out.checks.push_back(std::move(c));
  }
  return out;
}

SuiteResult monotonicity_suite(int probes, std::uint64_t seed) {
  SuiteResult out{"monotonicity", {}, {}};
  Rng rng = make_rng(seed, 0x30e0);
  std::uniform_int_distribution<int> agents(1, 5), sdim(1, 6);
  const Scalar h = 1e-5;
  Scalar worst = std::numeric_limits<Scalar>::infinity();
  int violations = 0;
  critic::Mixer mixer;
  for (int p = 0; p < probes; ++p) {
    if (p % 50 == 0) mixer = random_mixer(agents(rng), sdim(rng), rng);
    const Index k = mixer.config().num_agents;
    const Vec state = normal_vec(mixer.config().state_dim, 1.0, rng);
    const Vec q = normal_vec(k, 5.0, rng);
    for (Index a = 0; a < k; ++a) {
      Vec plus = q, minus = q;
      plus(a) += h;
      minus(a) -= h;
      const Scalar d = (mixer.mix(plus, state) - mixer.mix(minus, state)) / (2.0 * h);
      worst = std::min(worst, d);
      if (d < -1e-8) ++violations;
    }
  }
  Check c;
  c.name = std::to_string(probes) + " probes: dQ_tot/dQ^a >= -1e-8";
  c.pass = violations == 0;
  c.diagnostic = fmt("smallest derivative %.3g", worst) + ", violations " + std::to_string(violations);
  out.checks.push_back(std::move(c));
  return out;
}

SuiteResult gradient_suite(int probes, std::uint64_t seed) {
  SuiteResult out{"gradients", {}, {}};
  const Scalar tol = 1e-4;
  auto run = [&](const std::string& name, auto&& fn) {
    Scalar worst = 0.0;
    std::string where;
    bool ok = true;
    for (int i = 0; i < probes; ++i) {
      const GradCheck g = fn(seed + static_cast<std::uint64_t>(i));
      if (!g.pass(tol)) ok = false;
      if (g.max_rel_error >= worst) {
        worst = g.max_rel_error;
        where = g.worst;
      }
    }
    Check c;
    c.name = name + " (" + std::to_string(probes) + " probes)";
    c.pass = ok;
    c.diagnostic = fmt("max relative error %.3g", worst) + " at " + where;
    out.checks.push_back(std::move(c));
  };
  using policy::HeadKind;
  for (bool rec : {false, true}) {
    const std::string enc = rec ? "gru" : "mlp";
    run("network backward, " + enc, [&](std::uint64_t s) { return check_network_gradient(s, rec); });
    for (HeadKind kind : {HeadKind::categorical, HeadKind::gaussian}) {
      const std::string head = kind == HeadKind::categorical ? "categorical" : "gaussian";
      run("main policy, " + head + ", " + enc,
          [&](std::uint64_t s) { return check_main_policy_gradient(s, kind, rec); });
      run("proposal policy with entropy, " + head + ", " + enc,
          [&](std::uint64_t s) { return check_proposal_policy_gradient(s, kind, rec); });
    }
  }
  for (HeadKind kind : {HeadKind::categorical, HeadKind::gaussian}) {
    const std::string head = kind == HeadKind::categorical ? "categorical" : "gaussian";
    run("centralized score function, " + head, [&](std::uint64_t s) { return check_centralized_policy_gradient(s, kind); });
  }
  for (auto mode : {critic::MixerMode::ncd_monotonic, critic::MixerMode::linear}) {
    for (bool discrete : {true, false}) {
      for (bool rec : {false, true}) {
        const std::string name = std::string("critic loss through ") + (mode == critic::MixerMode::linear ? "linear" : "ncd") +
                                 " mixer, " + (discrete ? "discrete" : "continuous") + ", " + (rec ? "gru" : "mlp");
        run(name, [&](std::uint64_t s) { return check_critic_loss_gradient(s, mode, discrete, rec); });
      }
    }
  }
  return out;
}

SuiteResult retrace_suite(int mdps, std::uint64_t seed) {
  SuiteResult out{"retrace", {}, {}};
  Rng rng = make_rng(seed, 0x4e7);
  for (int m = 0; m < mdps; ++m) {
    const auto mdp = envs::TabularMDPConfig::random(5, 2, 2, 0.9, rng);
    const Mat pi = envs::joint_policy(mdp, envs::random_policy_tables(mdp, rng));
    const DPResult dp = dp_policy_eval(mdp, pi, 1e-12);
    for (auto variant : {critic::TraceVariant::retrace, critic::TraceVariant::tree_backup}) {
      critic::TraceSpec spec;
      spec.lambda = 1.0;
      spec.variant = variant;
      const auto it = critic::iterate_return_operator(mdp, pi, pi, spec, Mat::Zero(pi.rows(), pi.cols()), 1e-12, 1000);
      const Scalar err = (it.q - dp.q).cwiseAbs().maxCoeff();
      Check c;
      c.name = "mdp " + std::to_string(m + 1) + ", " + critic::to_string(variant) + ": fixed point equals Q^pi";
      c.pass = dp.converged && it.sweeps <= 1000 && err < 1e-6;
      c.diagnostic = fmt("sup error %.3g after %.0f sweeps", err, it.sweeps);
      out.checks.push_back(std::move(c));
    }
  }
  return out;
}

SuiteResult coefficient_suite(int samples, std::uint64_t seed) {
  SuiteResult out{"coefficients", {}, {}};
  Rng rng = make_rng(seed, 0xc0ef);
  std::uniform_real_distribution<Scalar> logp(-15.0, 0.0), lam(0.0, 1.0);
  int range_bad = 0, equal_bad = 0, tb_bad = 0;
  for (int i = 0; i < samples; ++i) {
    const Scalar lp = logp(rng), lb = logp(rng), l = lam(rng);
    critic::TraceSpec retrace;
    retrace.lambda = l;
    critic::TraceSpec tb = retrace;
    tb.variant = critic::TraceVariant::tree_backup;
    const Scalar c = critic::trace_coeff(retrace, lp, lb, std::exp(lp));
    if (!(c >= 0.0 && c <= l)) ++range_bad;
    if (critic::trace_coeff(retrace, lp, lp, std::exp(lp)) != l) ++equal_bad;
    const Scalar ctb = critic::trace_coeff(tb, lp, lb, std::exp(lp));
    if (std::abs(ctb - l * std::exp(lp)) > 1e-15) ++tb_bad;
  }
  const std::string n = std::to_string(samples);
  out.checks.push_back({"retrace c in [0, lambda] (" + n + " samples)", range_bad == 0, "failures " + std::to_string(range_bad)});
  out.checks.push_back({"retrace c == lambda when pi == beta (" + n + " samples)", equal_bad == 0, "failures " + std::to_string(equal_bad)});
  out.checks.push_back({"tree backup c == lambda * pi (" + n + " samples)", tb_bad == 0, "failures " + std::to_string(tb_bad)});
  return out;
}

SuiteResult theorem51_suite(int seeds, int required) {
  SuiteResult out{"theorem51", {}, {}};
  std::vector<std::uint64_t> list;
  for (int s = 1; s <= seeds; ++s) list.push_back(static_cast<std::uint64_t>(s));
  const auto game = envs::MatrixGameConfig::penalty();
  const auto rows = theorem_51_experiment(game, list, Theorem51Config{});
  int wins = 0;
  for (const auto& r : rows) {
    const bool ok = r.mcem >= r.centralized;
    wins += ok ? 1 : 0;
    out.notes.push_back("seed " + std::to_string(r.seed) +
                        fmt(": initial %.4f, mcem %.4f, centralized %.4f", r.initial, r.mcem, r.centralized));
  }
  Check c;
  c.name = "penalty game: mcem >= centralized in >= " + std::to_string(required) + "/" + std::to_string(seeds) + " seeds";
  c.pass = wins >= required;
  c.diagnostic = std::to_string(wins) + "/" + std::to_string(seeds);
  out.checks.push_back(std::move(c));
  return out;
}

SuiteResult quantile_suite(int instances, std::uint64_t seed) {
  SuiteResult out{"quantile", {}, {}};
  Rng rng = make_rng(seed, 0x9a7);
  std::uniform_int_distribution<int> size(1, 50), coarse(0, 4);
  std::uniform_real_distribution<Scalar> rho_dist(0.0, 1.0), value(-10.0, 10.0);
  std::bernoulli_distribution with_ties(0.5);
  int mismatches = 0;
  for (int i = 0; i < instances; ++i) {
    const int n = size(rng);
    const Scalar rho = rho_dist(rng);
    const bool ties = with_ties(rng);
    Vec values(n);
    for (int j = 0; j < n; ++j) values(j) = ties ? static_cast<Scalar>(coarse(rng)) : value(rng);
    const std::vector<policy::ActionDist> dists{policy::ActionDist::categorical(Vec::Zero(3))};
    const policy::QEvaluator eval = [&](std::span<const JointAction> u) {
      if (static_cast<int>(u.size()) != n) throw UsageError("quantile suite: unexpected batch size");
      return values;
    };
    Rng sample_rng = make_rng(seed, 0x1000 + static_cast<std::uint64_t>(i));
    const policy::EliteSet elites = policy::mcem_elites(dists, eval, static_cast<std::size_t>(n), rho, sample_rng);
    const auto expected = quantile_oracle(std::span<const Scalar>(values.data(), static_cast<std::size_t>(n)), rho);
    if (elites.sample_indices != expected) ++mismatches;
  }
  out.checks.push_back({"mcem_elites == quantile oracle (" + std::to_string(instances) + " instances)", mismatches == 0,
                        "mismatches " + std::to_string(mismatches)});
  const std::size_t d = policy::elite_count(10, 0.8);
  const std::size_t c = policy::elite_count(20, 0.9);
  out.checks.push_back({"elite count N=10, rho=0.8 is 2", d == 2, "got " + std::to_string(d)});
  out.checks.push_back({"elite count N=20, rho=0.9 is 2", c == 2, "got " + std::to_string(c)});
  return out;
}

SuiteResult entropy_suite(int samples, std::uint64_t seed) {
  SuiteResult out{"entropy", {}, {}};
  Rng rng = make_rng(seed, 0xe17);
  for (Scalar sigma : {0.1, 0.5, 1.0, 2.0}) {
    std::normal_distribution<Scalar> nd(0.3, sigma);
    Scalar sum = 0.0;
    for (int i = 0; i < samples; ++i) {
      const Scalar z = (nd(rng) - 0.3) / sigma;
      sum += std::log(sigma) + 0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * z * z;
    }
    const Scalar mc = sum / samples;
    const Scalar closed = policy::ActionDist::gaussian_moments(Vec::Constant(1, 0.3), Vec::Constant(1, sigma)).entropy();
    Check c;
    c.name = fmt("gaussian entropy sigma=%g: closed form vs monte carlo", sigma);
    c.pass = std::abs(mc - closed) < 1e-2;
    c.diagnostic = fmt("closed %.6f, monte carlo %.6f", closed, mc);
    out.checks.push_back(std::move(c));
  }
  return out;
}

}  // namespace mcem::oracle

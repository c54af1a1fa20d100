#pragma once

#include "mcem/approx/param_store.hpp"
#include "mcem/critic/mixer.hpp"
#include "mcem/envs/matrix_game.hpp"
#include "mcem/envs/tabular_mdp.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mcem::oracle {

// Reference implementations used to check the library. They are written with plain loops
// and share no numerical kernels with the code they check.

struct DPResult {
  Mat q;  // S x J
  int iterations = 0;
  Scalar residual = 0.0;
  std::vector<Scalar> residual_history;
  bool converged = false;
};

/// Q^pi by value iteration: Q(s,j) <- r(s,j) + gamma sum_s' P(s'|s,j) sum_j' pi(j'|s') Q(s',j').
/// `joint_pi` is S x J.
DPResult dp_policy_eval(const envs::TabularMDPConfig& mdp, const Mat& joint_pi, Scalar tol, int max_iterations = 100000);

struct IgmResult {
  bool pass = true;
  std::vector<int> global_argmax;
  std::vector<int> local_argmax;
  Scalar global_value = 0.0;
};

/// Enumerates every joint action; passes iff argmax q_tot equals the per-agent argmaxes.
/// Ties resolve to the lowest index. Refuses (UsageError) when |U|^k exceeds `max_joint`.
IgmResult igm_check(const critic::Mixer& mixer, std::span<const Vec> local_q, const Vec& state,
                    std::size_t max_joint = 1000000);

/// Indices of the max(1, floor(N (1 - rho))) largest values, earlier index first on ties,
/// listed in selection order.
std::vector<std::size_t> quantile_oracle(std::span<const Scalar> values, Scalar rho);

/// Central differences of `objective` with respect to every scalar of `params`.
std::map<std::string, Mat> finite_diff(approx::ParamStore& params, const std::function<Scalar()>& objective,
                                       Scalar h = 1e-5);
Vec finite_diff(const Vec& x, const std::function<Scalar(const Vec&)>& objective, Scalar h = 1e-5);

/// |a - n| / max(|a|, |n|, floor).
Scalar relative_error(Scalar analytic, Scalar numeric, Scalar floor = 1e-4);

struct Theorem51Config {
  int iterations = 300;
  int samples = 10;
  Scalar rho = 0.8;
  Scalar learning_rate = 0.05;
  Scalar entropy_coeff = 0.03;
  Scalar init_scale = 0.1;
};

struct Theorem51Row {
  std::uint64_t seed = 0;
  Scalar initial = 0.0;
  Scalar mcem = 0.0;
  Scalar centralized = 0.0;
};

/// Exact expected payoff sum_u prod_a pi^a(u^a) payoff(u); `probs[a]` is agent a's distribution.
Scalar expected_payoff(const envs::MatrixGameConfig& game, std::span<const Vec> probs);

/// Tabular softmax policies on a single-step matrix game trained two ways from the same
/// initialization: MCEM elite updates (main + proposal) and the centralized score-function
/// gradient with the exact payoff as critic. Same iterations, samples and learning rate.
std::vector<Theorem51Row> theorem_51_experiment(const envs::MatrixGameConfig& game,
                                                std::span<const std::uint64_t> seeds, const Theorem51Config& config);

}  // namespace mcem::oracle

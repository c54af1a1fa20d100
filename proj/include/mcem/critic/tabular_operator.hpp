#pragma once

#include "mcem/critic/trace.hpp"
#include "mcem/envs/tabular_mdp.hpp"

namespace mcem::critic {

/// Exact expectation of the n-step return operator on a finite MDP.
///
/// `q`, `pi` and `beta` are S x J tables over joint actions. Trajectories start at (s, u),
/// follow `beta` afterwards, and bootstrap with the expected value of `q` under `pi`.
/// The discount is the MDP's; `spec.gamma` is ignored.
Mat expected_return_operator(const envs::TabularMDPConfig& mdp, const Mat& pi, const Mat& beta, const Mat& q,
                             const TraceSpec& spec);

struct OperatorIteration {
  Mat q;
  int sweeps = 0;
  Scalar last_change = 0.0;
  bool converged = false;
};

/// Repeats q <- R q from `q0` until the sup-norm change drops below `tol` or `max_sweeps`.
OperatorIteration iterate_return_operator(const envs::TabularMDPConfig& mdp, const Mat& pi, const Mat& beta,
                                          const TraceSpec& spec, Mat q0, Scalar tol, int max_sweeps);

}  // namespace mcem::critic

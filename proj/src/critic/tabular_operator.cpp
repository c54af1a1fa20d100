#include "mcem/critic/tabular_operator.hpp"

#include <cmath>

namespace mcem::critic {

Mat expected_return_operator(const envs::TabularMDPConfig& mdp, const Mat& pi, const Mat& beta, const Mat& q,
                             const TraceSpec& spec) {
  const int S = mdp.num_states;
  const int J = mdp.num_joint();
  if (pi.rows() != S || pi.cols() != J || beta.rows() != S || beta.cols() != J || q.rows() != S || q.cols() != J) {
    throw UsageError("operator tables must be S x J");
  }
  const Scalar gamma = mdp.gamma;

  // Expected one-step TD error and the trace coefficient for every (s, j).
  const Vec v = (pi.array() * q.array()).rowwise().sum();
  Mat delta(S, J);
  Mat coeff(S, J);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < J; ++j) {
      const Scalar next_v = mdp.transitions.row(static_cast<Index>(s) * J + j).dot(v);
      delta(s, j) = td_delta(q(s, j), mdp.rewards(s, j), next_v, false, gamma);
      const Scalar p = pi(s, j);
      const Scalar b = beta(s, j);
      coeff(s, j) = b > 0.0 ? trace_coeff(spec, std::log(p), std::log(b), p) : 0.0;
    }
  }
  // G_m = delta + gamma * P (beta .* c .* G_{m-1}), G_0 = 0.
  Mat g = Mat::Zero(S, J);
  for (int m = 0; m < spec.horizon; ++m) {
    const Vec carried = (beta.array() * coeff.array() * g.array()).rowwise().sum();
    Mat next(S, J);
    for (int s = 0; s < S; ++s) {
      for (int j = 0; j < J; ++j) {
        next(s, j) = delta(s, j) + gamma * mdp.transitions.row(static_cast<Index>(s) * J + j).dot(carried);
      }
    }
    g = std::move(next);
  }
  return q + g;
}

OperatorIteration iterate_return_operator(const envs::TabularMDPConfig& mdp, const Mat& pi, const Mat& beta,
                                          const TraceSpec& spec, Mat q0, Scalar tol, int max_sweeps) {
  OperatorIteration it;
  it.q = std::move(q0);
  while (it.sweeps < max_sweeps) {
    Mat next = expected_return_operator(mdp, pi, beta, it.q, spec);
    it.last_change = (next - it.q).cwiseAbs().maxCoeff();
    it.q = std::move(next);
    ++it.sweeps;
    if (it.last_change < tol) {
      it.converged = true;
      break;
    }
  }
  return it;
}

}  // namespace mcem::critic

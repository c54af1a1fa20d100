#include "mcem/oracle/oracle.hpp"

#include <cmath>

namespace mcem::oracle {

DPResult dp_policy_eval(const envs::TabularMDPConfig& mdp, const Mat& joint_pi, Scalar tol, int max_iterations) {
  mdp.validate();
  const int S = mdp.num_states;
  const int J = mdp.num_joint();
  if (joint_pi.rows() != S || joint_pi.cols() != J) throw UsageError("joint policy must be S x J");
  DPResult out;
  std::vector<double> q(static_cast<std::size_t>(S * J), 0.0);
  std::vector<double> v(static_cast<std::size_t>(S), 0.0);
  auto at = [J](int s, int j) { return static_cast<std::size_t>(s * J + j); };
  while (out.iterations < max_iterations) {
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      for (int j = 0; j < J; ++j) acc += joint_pi(s, j) * q[at(s, j)];
      v[static_cast<std::size_t>(s)] = acc;
    }
    double residual = 0.0;
    std::vector<double> next(q.size());
    for (int s = 0; s < S; ++s) {
      for (int j = 0; j < J; ++j) {
        double expect = 0.0;
        for (int s2 = 0; s2 < S; ++s2) expect += mdp.transitions(s * J + j, s2) * v[static_cast<std::size_t>(s2)];
        const double value = mdp.rewards(s, j) + mdp.gamma * expect;
        residual = std::max(residual, std::abs(value - q[at(s, j)]));
        next[at(s, j)] = value;
      }
    }
    q.swap(next);
    ++out.iterations;
    out.residual = residual;
    out.residual_history.push_back(residual);
    if (residual < tol) {
      out.converged = true;
      break;
    }
  }
  out.q.resize(S, J);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < J; ++j) out.q(s, j) = q[at(s, j)];
  }
  return out;
}

}  // namespace mcem::oracle

#include "mcem/approx/adam.hpp"

#include <cmath>

namespace mcem::approx {

void adam_update(ParamStore& params, OptimState& opt, bool maximize) {
  opt.steps += 1;
  const Scalar t = static_cast<Scalar>(opt.steps);
  const Scalar c1 = 1.0 - std::pow(opt.beta1, t);
  const Scalar c2 = 1.0 - std::pow(opt.beta2, t);
  const Scalar sign = maximize ? -1.0 : 1.0;
  for (auto& [name, e] : params.entries()) {
    auto [m_it, m_new] = opt.first_moment.try_emplace(name, Mat::Zero(e.value.rows(), e.value.cols()));
    auto [v_it, v_new] = opt.second_moment.try_emplace(name, Mat::Zero(e.value.rows(), e.value.cols()));
    Mat& m = m_it->second;
    Mat& v = v_it->second;
    const Mat g = sign * e.grad;
    m = opt.beta1 * m + (1.0 - opt.beta1) * g;
    v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseAbs2();
    e.value.array() -= opt.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.epsilon);
    e.grad.setZero();
  }
  params.step_count += 1;
}

}  // namespace mcem::approx

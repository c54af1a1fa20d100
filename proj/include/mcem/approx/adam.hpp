#pragma once

#include "mcem/approx/param_store.hpp"

#include <map>
#include <string>

namespace mcem::approx {

struct OptimState {
  Scalar learning_rate = 1e-3;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
  std::map<std::string, Mat> first_moment;
  std::map<std::string, Mat> second_moment;
  std::int64_t steps = 0;
};

/// Bias-corrected adaptive-moment step on every tensor of `params`, then zeroes the gradients.
/// With `maximize` the step ascends the accumulated gradient.
void adam_update(ParamStore& params, OptimState& opt, bool maximize = false);

}  // namespace mcem::approx

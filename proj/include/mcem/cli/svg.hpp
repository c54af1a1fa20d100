#pragma once

#include "mcem/core.hpp"

#include <string>
#include <vector>

namespace mcem::cli {

struct Series {
  std::string name;
  std::vector<Scalar> x;
  std::vector<Scalar> y;
};

/// Trailing moving average over `window` points (shorter at the start).
std::vector<Scalar> moving_average(const std::vector<Scalar>& y, std::size_t window);

/// Static line chart with axes, tick labels and a legend.
std::string line_chart(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

}  // namespace mcem::cli

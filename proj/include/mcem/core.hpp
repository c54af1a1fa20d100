#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcem {

using Scalar = double;
using Index = Eigen::Index;

template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecT<Scalar>;
using Mat = MatT<Scalar>;

/// One action per agent. Discrete actions are stored as a 1-vector holding the index.
using JointAction = std::vector<Vec>;

using Rng = std::mt19937_64;

/// Invalid configuration (bad shapes, out-of-range hyperparameters, malformed config files).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// API misuse: empty inputs, out-of-range indices, missing forward context.
struct UsageError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Non-finite values where finite ones are required.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Checkpoint / dump files that cannot be read back.
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int action_index(const Vec& action) { return static_cast<int>(action(0)); }

inline Vec discrete_action(int index) {
  Vec a(1);
  a(0) = static_cast<Scalar>(index);
  return a;
}

/// Derives an independent generator from a parent seed and a stream tag.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace mcem

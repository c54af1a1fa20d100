#pragma once

#include "mcem/core.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace mcem::approx {

enum class Activation { relu, tanh, elu, identity };

Activation parse_activation(std::string_view name);
std::string to_string(Activation act);

/// Elementwise activation; works on any dense expression.
template <typename Derived>
typename Derived::PlainObject activate(const Eigen::MatrixBase<Derived>& x, Activation act) {
  using S = typename Derived::Scalar;
  switch (act) {
    case Activation::relu:
      return x.unaryExpr([](S v) { return v > S(0) ? v : S(0); });
    case Activation::tanh:
      return x.unaryExpr([](S v) { return std::tanh(v); });
    case Activation::elu:
      return x.unaryExpr([](S v) { return v > S(0) ? v : std::expm1(v); });
    case Activation::identity:
      break;
  }
  return x;
}

/// Derivative of the activation with respect to its pre-activation input.
template <typename Derived>
typename Derived::PlainObject activate_grad(const Eigen::MatrixBase<Derived>& pre, Activation act) {
  using S = typename Derived::Scalar;
  switch (act) {
    case Activation::relu:
      return pre.unaryExpr([](S v) { return v > S(0) ? S(1) : S(0); });
    case Activation::tanh:
      return pre.unaryExpr([](S v) {
        const S t = std::tanh(v);
        return S(1) - t * t;
      });
    case Activation::elu:
      return pre.unaryExpr([](S v) { return v > S(0) ? S(1) : std::exp(v); });
    case Activation::identity:
      break;
  }
  return Derived::PlainObject::Ones(pre.rows(), pre.cols());
}

template <typename S>
S sigmoid(S x) {
  if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
  const S e = std::exp(x);
  return e / (S(1) + e);
}

template <typename S>
S softplus(S x) {
  return x > S(30) ? x : std::log1p(std::exp(x));
}

}  // namespace mcem::approx

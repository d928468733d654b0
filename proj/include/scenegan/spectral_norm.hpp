#pragma once

#include "scenegan/random.hpp"
#include "scenegan/tensor.hpp"

#include <algorithm>

namespace scenegan {

/// Persistent left/right singular vector estimates for one weight.
template <typename Scalar>
struct PowerIteration {
  Vector<Scalar> u;  // rows
  Vector<Scalar> v;  // cols
  Scalar sigma = 1;
};

inline constexpr double kMinSigma = 1e-12;

template <typename Scalar>
PowerIteration<Scalar> make_power_iteration(int rows, int cols, Rng& rng) {
  PowerIteration<Scalar> state;
  state.u.resize(rows);
  for (int i = 0; i < rows; ++i) state.u[i] = static_cast<Scalar>(rng.normal());
  state.u /= std::max(state.u.norm(), static_cast<Scalar>(kMinSigma));
  state.v = Vector<Scalar>::Zero(cols);
  return state;
}

/// Runs `iterations` power-iteration steps on `weight` (out x rest), updating the
/// persistent vectors, and returns the largest singular value estimate u^T W v.
template <typename Scalar>
Scalar estimate_spectral_norm(const Matrix<Scalar>& weight, PowerIteration<Scalar>& state, int iterations) {
  const auto eps = static_cast<Scalar>(kMinSigma);
  for (int i = 0; i < iterations; ++i) {
    state.v = weight.transpose() * state.u;
    state.v /= std::max(state.v.norm(), eps);
    state.u = weight * state.v;
    state.u /= std::max(state.u.norm(), eps);
  }
  state.sigma = std::max(state.u.dot(weight * state.v), eps);
  return state.sigma;
}

/// Returns weight / sigma_max, with sigma_max estimated by power iteration.
/// A zero weight stays zero (sigma is clamped below by 1e-12).
template <typename Scalar>
Matrix<Scalar> spectral_normalize(const Matrix<Scalar>& weight, PowerIteration<Scalar>& state, int iterations) {
  const Scalar sigma = estimate_spectral_norm(weight, state, iterations);
  return weight / sigma;
}

/// Weight normalized with the sigma already stored in `state` (no iteration).
template <typename Scalar>
Matrix<Scalar> apply_spectral_norm(const Matrix<Scalar>& weight, const PowerIteration<Scalar>& state) {
  return weight / state.sigma;
}

/// Gradient w.r.t. the raw weight given the gradient w.r.t. the normalized weight,
/// treating u and v as constants: dW = (G - <G, W_n> u v^T) / sigma.
template <typename Scalar>
Matrix<Scalar> spectral_norm_backward(const Matrix<Scalar>& grad_normalized, const Matrix<Scalar>& normalized,
                                      const PowerIteration<Scalar>& state) {
  const Scalar inner = grad_normalized.cwiseProduct(normalized).sum();
  Matrix<Scalar> grad = grad_normalized;
  grad.noalias() -= inner * state.u * state.v.transpose();
  return grad / state.sigma;
}

}  // namespace scenegan

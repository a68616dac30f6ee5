#include "pinn/adam.hpp"

#include <cmath>

namespace pinn {

void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad) {
  const std::size_t n = theta.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n)
    throw GraphError("adam: size mismatch between parameters, moments and gradient");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grad[i]))
      throw GradError("non-finite gradient for parameter " + std::to_string(i),
                      static_cast<int>(i));
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

}  // namespace pinn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinn/graph.hpp"

namespace pinn {

/// Adam with bias correction; one state per training run.
struct AdamState {
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(int n_params, double lr_, double beta1_ = 0.9, double beta2_ = 0.999,
            double eps_ = 1e-8)
      : m(n_params, 0.0), v(n_params, 0.0), lr(lr_), beta1(beta1_), beta2(beta2_), eps(eps_) {}
};

/// One full-batch update. The gradient is validated before any state is
/// touched, so a failed step leaves parameters and moments unchanged.
void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad);

}  // namespace pinn

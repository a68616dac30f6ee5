#pragma once

#include <cstdint>
#include <optional>

#include "pinn/losses.hpp"
#include "pinn/oracle.hpp"

namespace pinn {

/// Gradient check of a full training loss (or the NLL total when `strategy`
/// is empty) on a random net: parameter indices are sampled per layer, the
/// analytic gradient comes from the batched reverse path, and the reference
/// is a central difference of the loss value. Adaptive weights are frozen at
/// theta0 on both sides, matching their detached role in training.
FdReport fd_check_loss(const PdeProblem& problem, const std::optional<WeightStrategy>& strategy,
                       const Arch& arch, const Counts& counts, std::uint64_t seed,
                       double h = 1e-4, double tol = 1e-5, int per_layer = 20);

/// Exact-solution diagnostics: the solution expression is pushed through the
/// residual operator and the condition targets at random points.
struct ManufacturedReport {
  double max_pde = 0.0;
  double max_bc = 0.0;
  double max_ic = 0.0;
  double max_vel = 0.0;
  bool has_ic = false;
  bool has_vel = false;
};
ManufacturedReport manufactured_report(const PdeProblem& problem, int n_points,
                                       std::uint64_t seed);

/// Max absolute deviation between the optimizer and the straight-line
/// reference recurrence over a scripted random gradient sequence.
double adam_equivalence_error(int n_params, int n_steps, std::uint64_t seed);

}  // namespace pinn

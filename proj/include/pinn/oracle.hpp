#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace pinn {

// ---------------------------------------------------------------------------
// Finite-difference gradient checking
// ---------------------------------------------------------------------------

struct FdEntry {
  int param_index;
  double analytic;
  double fd;
  double rel_error;
};

struct FdReport {
  std::vector<FdEntry> entries;
  double max_rel_error = 0.0;
  double h = 1e-4;
  double tol = 1e-5;
  bool pass = false;
};

/// Central-difference check of `analytic_grad` against the loss closure at
/// the sampled parameter indices. Relative error uses
/// |a-f| / max(|a|,|f|,1e-12).
FdReport fd_check(const std::function<double(std::span<const double>)>& loss_value,
                  std::span<const double> analytic_grad, std::span<const double> theta,
                  std::span<const int> indices, double h = 1e-4, double tol = 1e-5);

// ---------------------------------------------------------------------------
// Independent Adam recurrence (no code shared with the optimizer module)
// ---------------------------------------------------------------------------

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Applies the textbook bias-corrected recurrence to a scripted gradient
/// sequence; returns the parameter vector after each step.
std::vector<std::vector<double>> adam_reference(std::vector<double> theta0,
                                                const std::vector<std::vector<double>>& grads,
                                                const AdamHyper& hp);

// ---------------------------------------------------------------------------
// Burgers reference solution (Cole-Hopf + Gauss-Hermite)
// ---------------------------------------------------------------------------

struct BurgersReference {
  int n_t = 100;
  int n_x = 256;
  int quad_order = 200;
  std::vector<double> u;  // row-major, t-major: u[it * n_x + ix]

  double at(int it, int ix) const { return u[static_cast<std::size_t>(it) * n_x + ix]; }
  double t_of(int it) const { return static_cast<double>(it) / (n_t - 1); }
  double x_of(int ix) const { return -1.0 + 2.0 * static_cast<double>(ix) / (n_x - 1); }
};

/// Nodes and weights for \int e^{-z^2} f(z) dz with n nodes.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Closed-form Cole-Hopf solution of u_t + u u_x = (0.01/pi) u_xx with
/// u(0,x) = -sin(pi x), evaluated by Gauss-Hermite quadrature.
double burgers_cole_hopf(double t, double x, std::span<const double> nodes,
                         std::span<const double> weights);

/// Computes the 100x256 reference grid at quadrature order 200 and verifies
/// order-100 agreement below `tol` (throws on non-convergence).
BurgersReference burgers_reference(double tol = 1e-6);

void save_burgers_reference(const std::filesystem::path& path, const BurgersReference& ref);
BurgersReference load_burgers_reference(const std::filesystem::path& path);

/// Loads the cached reference, recomputing and rewriting it when the file is
/// absent or fails validation.
BurgersReference load_or_compute_burgers(const std::filesystem::path& cache_path);

}  // namespace pinn

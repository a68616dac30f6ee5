#include "pinn/checks.hpp"

#include <cmath>
#include <set>

#include "pinn/adam.hpp"
#include "pinn/rng.hpp"
#include "pinn/sampler.hpp"

namespace pinn {

FdReport fd_check_loss(const PdeProblem& problem, const std::optional<WeightStrategy>& strategy,
                       const Arch& arch, const Counts& counts, std::uint64_t seed, double h,
                       double tol, int per_layer) {
  NetParams net = init_xavier(arch, seed);
  const PointSet points = sample_training(problem, counts, seed ^ 0x9e3779b97f4a7c15ull);
  LossModel model(problem, arch, points, 1);
  const TermValues& mask = model.term_mask();

  // Freeze this step's weights; they are detached in training, so the loss
  // closure must hold them fixed too.
  std::array<double, 3> w{1.0, 1.0, 1.0};
  double lambda = 0.0, w_nll = 0.0;
  if (strategy.has_value()) {
    const TermSums cur = model.eval_terms(net.theta);
    TermValues current{cur.l_r, cur.l_b, cur.l_0, mask.has_r, mask.has_b, mask.has_0};
    w = strategy_weights(*strategy, current, nullptr);
    if (strategy->method == Method::kM5) lambda = strategy->lambda;
  } else {
    w = {0.0, 0.0, 0.0};
    w_nll = 1.0;
  }

  auto loss_value = [&](std::span<const double> theta) {
    const TermSums s = model.eval_terms(theta);
    return w[0] * s.l_r + w[1] * s.l_b + w[2] * s.l_0 + lambda * (s.lp_r + s.lp_b + s.lp_0) +
           w_nll * s.nll;
  };

  LossModel::TermWeights tw;
  tw.w_r = w[0];
  tw.w_b = w[1];
  tw.w_0 = w[2];
  tw.wp_r = tw.wp_b = tw.wp_0 = lambda;
  tw.w_nll = w_nll;
  std::vector<double> grad(arch.param_count(), 0.0);
  model.eval_and_grad(net.theta, tw, grad);

  // Sample parameter indices per layer (weights and biases together).
  std::vector<int> indices;
  Rng rng(seed ^ 0xc2b2ae3d27d4eb4full);
  const auto sizes = arch.layer_sizes();
  int offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int layer_params = sizes[l] * sizes[l + 1] + sizes[l + 1];
    if (layer_params <= per_layer) {
      for (int i = 0; i < layer_params; ++i) indices.push_back(offset + i);
    } else {
      std::set<int> picked;
      while (static_cast<int>(picked.size()) < per_layer)
        picked.insert(offset + static_cast<int>(rng.next_u64() % layer_params));
      indices.insert(indices.end(), picked.begin(), picked.end());
    }
    offset += layer_params;
  }

  return fd_check(loss_value, grad, net.theta, indices, h, tol);
}

ManufacturedReport manufactured_report(const PdeProblem& problem, int n_points,
                                       std::uint64_t seed) {
  if (!problem.has_exact) throw OracleOnlyError("no exact solution for " + problem.name);
  ManufacturedReport rep;
  Graph g;
  std::vector<ExprNode> inputs;
  ExprNode t_in = g.input(problem.stationary ? "x" : "t");  // placeholder for 1-D
  if (!problem.stationary) inputs.push_back(t_in);
  ExprNode x_in = g.input("x");
  inputs.push_back(x_in);

  ExprNode exact_expr = problem.exact_builder(g, t_in, x_in);
  HeadOutputs heads{exact_expr, g.constant(1.0)};
  ExprNode pde = residual(problem, g, heads, inputs);
  ExprNode vel = problem.velocity.empty() ? ExprNode{} : g.d(exact_expr, "t", 1);

  Rng rng(seed);
  Bindings b;
  auto bind = [&](double t, double x) {
    b.inputs.clear();
    if (!problem.stationary) b.inputs.emplace("t", t);
    b.inputs.emplace("x", x);
  };

  for (int i = 0; i < n_points; ++i) {
    const double t = problem.stationary ? 0.0 : rng.uniform(0.0, problem.t_max);
    const double x = rng.uniform(problem.x_lo, problem.x_hi);
    bind(t, x);
    rep.max_pde = std::max(rep.max_pde, std::abs(g.eval(pde, b)));
  }

  for (const auto& spec : problem.boundary) {
    for (int i = 0; i < n_points; ++i) {
      const double t = problem.stationary ? 0.0 : rng.uniform(0.0, problem.t_max);
      bind(t, spec.x_fixed);
      const double u = g.eval(exact_expr, b);
      rep.max_bc = std::max(rep.max_bc, std::abs(u - spec.target(t, spec.x_fixed)));
    }
  }

  for (const auto& spec : problem.initial) {
    rep.has_ic = true;
    for (int i = 0; i < n_points; ++i) {
      const double x = rng.uniform(problem.x_lo, problem.x_hi);
      bind(0.0, x);
      const double u = g.eval(exact_expr, b);
      rep.max_ic = std::max(rep.max_ic, std::abs(u - spec.target(0.0, x)));
    }
  }

  for (const auto& spec : problem.velocity) {
    rep.has_vel = true;
    for (int i = 0; i < n_points; ++i) {
      const double x = rng.uniform(problem.x_lo, problem.x_hi);
      bind(0.0, x);
      const double ut = g.eval(vel, b);
      rep.max_vel = std::max(rep.max_vel, std::abs(ut - spec.target(0.0, x)));
    }
  }
  return rep;
}

double adam_equivalence_error(int n_params, int n_steps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> theta0(n_params);
  for (auto& v : theta0) v = rng.uniform(-1.0, 1.0);
  std::vector<std::vector<double>> grads(n_steps, std::vector<double>(n_params));
  for (auto& g : grads)
    for (auto& v : g) v = rng.uniform(-2.0, 2.0);

  const AdamHyper hp;
  const auto reference = adam_reference(theta0, grads, hp);

  AdamState state(n_params, hp.lr, hp.beta1, hp.beta2, hp.eps);
  std::vector<double> theta = theta0;
  double max_err = 0.0;
  for (int s = 0; s < n_steps; ++s) {
    adam_step(state, theta, grads[s]);
    for (int i = 0; i < n_params; ++i)
      max_err = std::max(max_err, std::abs(theta[i] - reference[s][i]));
  }
  return max_err;
}

}  // namespace pinn

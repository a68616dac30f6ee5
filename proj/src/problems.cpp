#include "pinn/problems.hpp"

#include <cmath>
#include <numbers>

namespace pinn {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);
const double kPoissonL = 2.0 * std::sqrt(kPi);

ExprNode mu_t(Graph& g, const HeadOutputs& h, int order = 1) { return g.d(h.mu, "t", order); }
ExprNode mu_x(Graph& g, const HeadOutputs& h, int order = 1) { return g.d(h.mu, "x", order); }

PdeProblem make_advection() {
  PdeProblem p;
  p.name = "advection";
  p.x_lo = 0.0;
  p.x_hi = 1.0;
  p.t_max = 0.5;
  p.residual_builder = [](Graph& g, const HeadOutputs& h, const std::vector<ExprNode>&) {
    return g.add(mu_t(g, h), mu_x(g, h));
  };
  p.boundary = {
      {ConditionKind::kBoundary, 0.0, [](double t, double) { return -2.0 * std::sin(kPi * t); }},
      {ConditionKind::kBoundary, 1.0, [](double t, double) { return 2.0 * std::sin(kPi * t); }},
  };
  p.initial = {
      {ConditionKind::kInitial, 0.0, [](double, double x) { return 2.0 * std::sin(kPi * x); }}};
  p.has_exact = true;
  p.exact_fn = [](double t, double x) { return 2.0 * std::sin(kPi * (x - t)); };
  p.exact_builder = [](Graph& g, ExprNode t, ExprNode x) {
    return 2.0 * g.sin(kPi * (x - t));
  };
  return p;
}

PdeProblem make_burgers() {
  PdeProblem p;
  p.name = "burgers";
  p.x_lo = -1.0;
  p.x_hi = 1.0;
  p.t_max = 1.0;
  const double nu = 0.01 / kPi;
  p.residual_builder = [nu](Graph& g, const HeadOutputs& h, const std::vector<ExprNode>&) {
    return mu_t(g, h) + h.mu * mu_x(g, h) - nu * mu_x(g, h, 2);
  };
  auto zero = [](double, double) { return 0.0; };
  p.boundary = {{ConditionKind::kBoundary, -1.0, zero}, {ConditionKind::kBoundary, 1.0, zero}};
  p.initial = {
      {ConditionKind::kInitial, 0.0, [](double, double x) { return -std::sin(kPi * x); }}};
  p.has_exact = false;
  return p;
}

PdeProblem make_convection_diffusion() {
  PdeProblem p;
  p.name = "convection_diffusion";
  p.x_lo = -4.0;
  p.x_hi = 4.0;
  p.t_max = 1.0;
  const double c = 4.0, mu = 0.05;
  p.residual_builder = [c, mu](Graph& g, const HeadOutputs& h, const std::vector<ExprNode>&) {
    return mu_t(g, h) + c * mu_x(g, h) - mu * mu_x(g, h, 2);
  };
  auto zero = [](double, double) { return 0.0; };
  p.boundary = {{ConditionKind::kBoundary, -4.0, zero}, {ConditionKind::kBoundary, 4.0, zero}};
  auto exact = [mu](double t, double x) {
    const double s = (t + 0.1) * mu;
    const double dx = x + 2.0 - 4.0 * t;
    return 0.1 / std::sqrt(s) * std::exp(-dx * dx / (4.0 * s));
  };
  p.initial = {{ConditionKind::kInitial, 0.0, [exact](double, double x) { return exact(0.0, x); }}};
  p.has_exact = true;
  p.exact_fn = exact;
  p.exact_builder = [mu](Graph& g, ExprNode t, ExprNode x) {
    ExprNode s = (t + 0.1) * mu;
    ExprNode dx = x + 2.0 - 4.0 * t;
    return 0.1 / g.sqrt(s) * g.exp(g.neg(g.powi(dx, 2) / (4.0 * s)));
  };
  return p;
}

PdeProblem make_poisson() {
  PdeProblem p;
  p.name = "poisson";
  p.x_lo = -kPoissonL;
  p.x_hi = kPoissonL;
  p.stationary = true;
  p.residual_builder = [](Graph& g, const HeadOutputs& h, const std::vector<ExprNode>& in) {
    ExprNode x2 = g.powi(in[0], 2);
    ExprNode f = 4.0 * x2 * g.sin(x2) - 2.0 * g.cos(x2);
    return g.neg(mu_x(g, h, 2)) - f;
  };
  auto zero = [](double, double) { return 0.0; };
  p.boundary = {{ConditionKind::kBoundary, -kPoissonL, zero},
                {ConditionKind::kBoundary, kPoissonL, zero}};
  p.has_exact = true;
  p.exact_fn = [](double, double x) { return std::sin(x * x); };
  p.exact_builder = [](Graph& g, ExprNode, ExprNode x) { return g.sin(g.powi(x, 2)); };
  return p;
}

PdeProblem make_wave() {
  PdeProblem p;
  p.name = "wave";
  p.x_lo = -4.0;
  p.x_hi = 4.0;
  p.t_max = 2.0;
  const double L = 4.0;
  p.residual_builder = [](Graph& g, const HeadOutputs& h, const std::vector<ExprNode>&) {
    return mu_t(g, h, 2) - 3.0 * mu_x(g, h, 2);
  };
  auto zero = [](double, double) { return 0.0; };
  p.boundary = {{ConditionKind::kBoundary, -L, zero}, {ConditionKind::kBoundary, L, zero}};
  p.initial = {{ConditionKind::kInitial, 0.0, [L](double, double x) {
                  return 1.0 / std::cosh(2.0 * x) - 0.5 / std::cosh(2.0 * (x - 2.0 * L)) -
                         0.5 / std::cosh(2.0 * (x + 2.0 * L));
                }}};
  p.velocity = {{ConditionKind::kInitialDerivative, 0.0, zero}};
  p.has_exact = true;
  p.exact_fn = [L](double t, double x) {
    return 0.5 / std::cosh(2.0 * (x - kSqrt3 * t)) -
           0.5 / std::cosh(2.0 * (x - 2.0 * L + kSqrt3 * t)) +
           0.5 / std::cosh(2.0 * (x + kSqrt3 * t)) -
           0.5 / std::cosh(2.0 * (x + 2.0 * L - kSqrt3 * t));
  };
  p.exact_builder = [L](Graph& g, ExprNode t, ExprNode x) {
    ExprNode ct = kSqrt3 * t;
    return 0.5 / g.cosh(2.0 * (x - ct)) - 0.5 / g.cosh(2.0 * (x - 2.0 * L + ct)) +
           0.5 / g.cosh(2.0 * (x + ct)) - 0.5 / g.cosh(2.0 * (x + 2.0 * L - ct));
  };
  return p;
}

}  // namespace

const std::vector<PdeProblem>& catalog() {
  static const std::vector<PdeProblem> problems = {
      make_advection(), make_burgers(), make_convection_diffusion(), make_poisson(), make_wave()};
  return problems;
}

const PdeProblem& find_problem(std::string_view name) {
  for (const auto& p : catalog())
    if (p.name == name) return p;
  throw GraphError("unknown problem '" + std::string(name) + "'");
}

ExprNode residual(const PdeProblem& problem, Graph& g, const HeadOutputs& heads,
                  const std::vector<ExprNode>& inputs) {
  if (static_cast<int>(inputs.size()) != problem.input_dim())
    throw GraphError("input count does not match problem dimension");
  return problem.residual_builder(g, heads, inputs);
}

double exact(const PdeProblem& problem, double t, double x) {
  if (!problem.has_exact)
    throw OracleOnlyError("problem '" + problem.name +
                          "' has no closed-form solution; use the oracle reference");
  const double t_eff = problem.stationary ? 0.0 : t;
  if (x < problem.x_lo || x > problem.x_hi ||
      (!problem.stationary && (t_eff < 0.0 || t_eff > problem.t_max)))
    throw GraphError("point outside the problem domain");
  return problem.exact_fn(t_eff, x);
}

ExprNode condition_residual(const PdeProblem& problem, const ConditionSpec& spec, Graph& g,
                            const HeadOutputs& heads, double t, double x) {
  constexpr double kLocusTol = 1e-12;
  switch (spec.kind) {
    case ConditionKind::kBoundary:
      if (std::abs(x - spec.x_fixed) > kLocusTol)
        throw GraphError("boundary point off its edge");
      if (!problem.stationary && (t < 0.0 || t > problem.t_max))
        throw GraphError("boundary point outside the time interval");
      break;
    case ConditionKind::kInitial:
    case ConditionKind::kInitialDerivative:
      if (std::abs(t) > kLocusTol) throw GraphError("initial point must have t = 0");
      break;
  }
  if (spec.kind == ConditionKind::kInitialDerivative)
    return g.sub(g.d(heads.mu, "t", 1), g.constant(spec.target(t, x)));
  return g.sub(heads.mu, g.constant(spec.target(t, x)));
}

}  // namespace pinn

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pinn/graph.hpp"
#include "pinn/net.hpp"

namespace pinn {

/// Raised when the analytic solution of a problem is requested but only a
/// numerically computed reference exists (Burgers).
struct OracleOnlyError : GraphError {
  using GraphError::GraphError;
};

enum class ConditionKind { kBoundary, kInitial, kInitialDerivative };

/// One Dirichlet boundary edge or initial-value/initial-derivative line,
/// with its target function.
struct ConditionSpec {
  ConditionKind kind;
  double x_fixed = 0.0;  // boundary edge coordinate (unused otherwise)
  std::function<double(double t, double x)> target;
};

/// A benchmark problem as data: domain, residual operator, conditions and
/// (when available) the exact solution both as a closure and as an
/// expression builder.
struct PdeProblem {
  std::string name;
  double x_lo = 0.0, x_hi = 1.0;
  double t_max = 0.0;  // meaningful only when !stationary
  bool stationary = false;

  std::function<ExprNode(Graph&, const HeadOutputs&, const std::vector<ExprNode>& inputs)>
      residual_builder;
  std::vector<ConditionSpec> boundary;  // shares the boundary point budget
  std::vector<ConditionSpec> initial;   // initial values, t = 0
  std::vector<ConditionSpec> velocity;  // initial time-derivative, t = 0 (extra budget)

  bool has_exact = false;
  std::function<double(double t, double x)> exact_fn;
  std::function<ExprNode(Graph&, ExprNode t, ExprNode x)> exact_builder;

  int input_dim() const { return stationary ? 1 : 2; }
};

/// The five benchmark problems with their fixed constants.
const std::vector<PdeProblem>& catalog();
const PdeProblem& find_problem(std::string_view name);

/// PDE residual of the mean head; `inputs` must match the problem dimension
/// ({t,x} or {x}).
ExprNode residual(const PdeProblem& problem, Graph& g, const HeadOutputs& heads,
                  const std::vector<ExprNode>& inputs);

/// Exact solution value. Burgers raises OracleOnlyError; out-of-domain
/// points are rejected.
double exact(const PdeProblem& problem, double t, double x);

/// Residual of one condition at a point on its locus (checked to 1e-12):
/// mu - target, or d(mu)/dt - target for initial-derivative conditions.
ExprNode condition_residual(const PdeProblem& problem, const ConditionSpec& spec, Graph& g,
                            const HeadOutputs& heads, double t, double x);

}  // namespace pinn

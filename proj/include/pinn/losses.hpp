#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string_view>

#include "pinn/exec.hpp"
#include "pinn/net.hpp"
#include "pinn/problems.hpp"
#include "pinn/sampler.hpp"
#include "pinn/thread_pool.hpp"

namespace pinn {

/// Compared training methods: plain sum, big-constant initial weighting,
/// residual-proportional weights, SoftAdapt, and the variance-auxiliary
/// total.
enum class Method { kM1, kM2, kM3, kM4, kM5 };

Method method_from_string(std::string_view s);
std::string_view method_name(Method m);

struct WeightStrategy {
  Method method = Method::kM1;
  double c0 = 100.0;    // M2: initial-condition multiplier
  double beta = 0.1;    // M4: SoftAdapt smoothing
  double lambda = 1.0;  // M5: auxiliary-task weight
};

/// Detached per-term values. `has_*` marks terms whose point sets exist;
/// adaptive weighting (M3/M4) normalizes over existing terms only.
struct TermValues {
  double l_r = 0.0, l_b = 0.0, l_0 = 0.0;
  bool has_r = true, has_b = true, has_0 = true;
};

struct DivergenceError : GraphError {
  using GraphError::GraphError;
};

/// Per-term weights for one step; computed from detached values, so no
/// gradient flows through them.
std::array<double, 3> strategy_weights(const WeightStrategy& strategy, const TermValues& current,
                                       const TermValues* previous);

// ---------------------------------------------------------------------------
// Expression-node route. Builds batch means as nodes over the parameter
// leaves by substituting every sample point; used by tests and as the
// independent route the fast path is checked against.
// ---------------------------------------------------------------------------

struct LossNodes {
  HeadOutputs heads;
  ExprNode l_r, l_b, l_0;     // squared-residual means (l_0 includes the
                              // initial-derivative mean when present)
  ExprNode lp_r, lp_b, lp_0;  // variance-involved means: log(s2+1) + r^2/s2
  ExprNode nll;               // 0.5 log s2 + r^2/(2 s2), summed over terms
  bool has_r = false, has_b = false, has_0 = false;
};

LossNodes build_loss_nodes(Graph& g, const PdeProblem& problem, const Arch& arch,
                           const PointSet& points);

struct LossBreakdown {
  double l_r = 0.0, l_b = 0.0, l_0 = 0.0;
  double lp_r = 0.0, lp_b = 0.0, lp_0 = 0.0;
  double total_value = 0.0;
  std::array<double, 3> weights{1.0, 1.0, 1.0};
  ExprNode total;  // valid on the node route only
};

/// Weighted total as a node plus its current value and term values.
LossBreakdown assemble_total(Graph& g, const LossNodes& nodes, const WeightStrategy& strategy,
                             const Bindings& bindings, const TermValues* previous);

// ---------------------------------------------------------------------------
// Batched route used by the trainer: compiled SIMD tapes over the point
// sets, deterministic fixed-order reductions, optional worker threads
// (numerics are independent of the worker count).
// ---------------------------------------------------------------------------

struct TermSums {
  double l_r = 0.0, l_b = 0.0, l_0 = 0.0;
  double lp_r = 0.0, lp_b = 0.0, lp_0 = 0.0;
  double nll = 0.0;
};

class LossModel {
 public:
  LossModel(const PdeProblem& problem, const Arch& arch, const PointSet& points,
            int n_threads = 1);

  int param_count() const { return arch_.param_count(); }
  const PointSet& points() const { return points_; }
  const TermValues& term_mask() const { return mask_; }

  /// All term means at theta; no gradient work.
  TermSums eval_terms(std::span<const double> theta);

  /// Weights applied to each term mean when accumulating the gradient.
  struct TermWeights {
    double w_r = 0.0, w_b = 0.0, w_0 = 0.0;     // squared means (w_0 also
                                                // scales the velocity mean)
    double wp_r = 0.0, wp_b = 0.0, wp_0 = 0.0;  // variance-involved means
    double w_nll = 0.0;
  };

  /// Term means plus gradient of the weighted sum, accumulated into `grad`
  /// (zeroed first). Gradient accumulation order is fixed regardless of the
  /// worker count.
  TermSums eval_and_grad(std::span<const double> theta, const TermWeights& weights,
                         std::span<double> grad);

  /// Prediction on a fixed point list (packed once).
  void prepare_prediction(std::span<const Sample2> points);
  void predict(std::span<const double> theta, std::vector<double>& mu_out,
               std::vector<double>& sigma2_out);

 private:
  struct SetBatches {
    int n_points = 0;
    int n_batches = 0;
    std::vector<double> inputs;      // n_batches * n_slots * kLanes
    std::vector<int> active;         // lanes in use per batch
  };

  SetBatches pack(std::span<const Sample2> pts) const;
  SetBatches pack_cond(std::span<const CondSample> pts) const;

  void sweep(const BatchExec& exec, const SetBatches& batches, std::span<const double> theta,
             std::span<const double> seeds, std::span<double> grad, double* sums,
             std::vector<BatchExec::Workspace>& ws, bool want_grad);

  PdeProblem problem_;
  Arch arch_;
  PointSet points_;
  TermValues mask_;
  Graph graph_;
  int slot_t_ = -1, slot_x_ = -1, slot_target_ = -1;
  int n_slots_ = 0;

  std::unique_ptr<BatchExec> colloc_exec_;  // roots: r^2, mnll_r, nll_r
  std::unique_ptr<BatchExec> cond_exec_;    // roots: c^2, mnll_c, nll_c
  std::unique_ptr<BatchExec> vel_exec_;     // roots: v^2
  std::unique_ptr<BatchExec> pred_exec_;    // roots: mu, sigma2

  SetBatches colloc_, boundary_, initial_, extra_, pred_;

  std::unique_ptr<ThreadPool> pool_;
  std::vector<BatchExec::Workspace> colloc_ws_, cond_ws_, vel_ws_, pred_ws_;
  std::vector<double> grad_scratch_;  // n_batches_max * param_count (threaded path)
  std::vector<double> sum_scratch_;   // n_batches_max * n_roots_max
};

}  // namespace pinn

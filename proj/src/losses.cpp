#include "pinn/losses.hpp"

#include <cassert>
#include <cmath>

namespace pinn {

Method method_from_string(std::string_view s) {
  if (s == "m1") return Method::kM1;
  if (s == "m2") return Method::kM2;
  if (s == "m3") return Method::kM3;
  if (s == "m4") return Method::kM4;
  if (s == "m5") return Method::kM5;
  throw GraphError("unknown method '" + std::string(s) + "' (expected m1..m5)");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kM1: return "m1";
    case Method::kM2: return "m2";
    case Method::kM3: return "m3";
    case Method::kM4: return "m4";
    case Method::kM5: return "m5";
  }
  return "?";
}

std::array<double, 3> strategy_weights(const WeightStrategy& strategy, const TermValues& current,
                                       const TermValues* previous) {
  const bool mask[3] = {current.has_r, current.has_b, current.has_0};
  const double values[3] = {current.l_r, current.l_b, current.l_0};
  std::array<double, 3> w{1.0, 1.0, 1.0};
  switch (strategy.method) {
    case Method::kM1:
    case Method::kM5:
      break;
    case Method::kM2:
      if (strategy.c0 <= 0.0) throw GraphError("m2 requires c0 > 0");
      w[2] = strategy.c0;
      break;
    case Method::kM3: {
      constexpr double kFloor = 1e-12;
      double lo = 0.0;
      bool first = true;
      for (int i = 0; i < 3; ++i) {
        if (!mask[i]) continue;
        const double v = std::max(values[i], kFloor);
        lo = first ? v : std::min(lo, v);
        first = false;
      }
      for (int i = 0; i < 3; ++i)
        if (mask[i]) w[i] = std::max(values[i], kFloor) / lo;
      break;
    }
    case Method::kM4: {
      double s[3] = {0.0, 0.0, 0.0};
      if (previous != nullptr) {
        const double prev[3] = {previous->l_r, previous->l_b, previous->l_0};
        for (int i = 0; i < 3; ++i)
          if (mask[i]) s[i] = values[i] - prev[i];
      }
      double smax = 0.0;
      bool first = true;
      for (int i = 0; i < 3; ++i) {
        if (!mask[i]) continue;
        smax = first ? s[i] : std::max(smax, s[i]);
        first = false;
      }
      double denom = 0.0;
      double e[3] = {0.0, 0.0, 0.0};
      for (int i = 0; i < 3; ++i) {
        if (!mask[i]) continue;
        e[i] = std::exp(strategy.beta * (s[i] - smax));
        denom += e[i];
      }
      for (int i = 0; i < 3; ++i)
        if (mask[i]) w[i] = e[i] / denom;
      break;
    }
  }
  if (strategy.method == Method::kM5 && strategy.lambda < 0.0)
    throw GraphError("m5 requires lambda >= 0");
  return w;
}

// ---------------------------------------------------------------------------
// Node route
// ---------------------------------------------------------------------------

namespace {

// Mean of a per-point expression over substituted points; constant zero for
// empty sets. Summation order matches the batched route (point order).
template <typename Pts, typename Subst>
ExprNode mean_over(Graph& g, const Pts& pts, const Subst& make_point_term) {
  if (pts.empty()) return g.constant(0.0);
  ExprNode sum = make_point_term(pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) sum = g.add(sum, make_point_term(pts[i]));
  return g.div(sum, g.constant(static_cast<double>(pts.size())));
}

}  // namespace

LossNodes build_loss_nodes(Graph& g, const PdeProblem& problem, const Arch& arch,
                           const PointSet& points) {
  if (arch.input_dim != problem.input_dim())
    throw GraphError("architecture input dim does not match problem");

  std::vector<ExprNode> inputs;
  ExprNode t_in;  // unused for stationary problems
  if (!problem.stationary) {
    t_in = g.input("t");
    inputs.push_back(t_in);
  }
  ExprNode x_in = g.input("x");
  inputs.push_back(x_in);
  ExprNode target = g.input("target");

  LossNodes nodes;
  nodes.heads = build_heads(g, arch, inputs);
  const ExprNode mu = nodes.heads.mu;
  const ExprNode s2 = nodes.heads.sigma2;

  ExprNode r = residual(problem, g, nodes.heads, inputs);
  ExprNode r2 = g.powi(r, 2);
  ExprNode mnll_r = g.log(s2 + 1.0) + r2 / s2;
  ExprNode nll_r = 0.5 * g.log(s2) + r2 / (2.0 * s2);

  ExprNode c = mu - target;
  ExprNode c2 = g.powi(c, 2);
  ExprNode mnll_c = g.log(s2 + 1.0) + c2 / s2;
  ExprNode nll_c = 0.5 * g.log(s2) + c2 / (2.0 * s2);

  auto at_sample = [&](ExprNode expr, const Sample2& p) {
    std::unordered_map<std::string, double> vals{{"x", p.x}};
    if (!problem.stationary) vals.emplace("t", p.t);
    return g.substitute(expr, vals);
  };
  auto at_cond = [&](ExprNode expr, const CondSample& p) {
    std::unordered_map<std::string, double> vals{{"x", p.x}, {"target", p.target}};
    if (!problem.stationary) vals.emplace("t", p.t);
    return g.substitute(expr, vals);
  };

  nodes.l_r = mean_over(g, points.collocation, [&](const Sample2& p) { return at_sample(r2, p); });
  ExprNode lp_r = mean_over(g, points.collocation,
                            [&](const Sample2& p) { return at_sample(mnll_r, p); });
  ExprNode nll_sum = mean_over(g, points.collocation,
                               [&](const Sample2& p) { return at_sample(nll_r, p); });

  nodes.l_b = mean_over(g, points.boundary, [&](const CondSample& p) { return at_cond(c2, p); });
  nodes.lp_b = mean_over(g, points.boundary, [&](const CondSample& p) { return at_cond(mnll_c, p); });
  nll_sum = g.add(nll_sum, mean_over(g, points.boundary,
                                     [&](const CondSample& p) { return at_cond(nll_c, p); }));

  ExprNode l_0 = mean_over(g, points.initial, [&](const CondSample& p) { return at_cond(c2, p); });
  nodes.lp_0 = mean_over(g, points.initial, [&](const CondSample& p) { return at_cond(mnll_c, p); });
  nll_sum = g.add(nll_sum, mean_over(g, points.initial,
                                     [&](const CondSample& p) { return at_cond(nll_c, p); }));

  if (!points.extra.empty()) {
    ExprNode v = g.d(mu, "t", 1) - target;
    ExprNode v2 = g.powi(v, 2);
    l_0 = g.add(l_0, mean_over(g, points.extra,
                               [&](const CondSample& p) { return at_cond(v2, p); }));
  }
  nodes.l_0 = l_0;
  nodes.lp_r = lp_r;
  nodes.nll = nll_sum;
  nodes.has_r = !points.collocation.empty();
  nodes.has_b = !points.boundary.empty();
  nodes.has_0 = !points.initial.empty() || !points.extra.empty();
  return nodes;
}

LossBreakdown assemble_total(Graph& g, const LossNodes& nodes, const WeightStrategy& strategy,
                             const Bindings& bindings, const TermValues* previous) {
  LossBreakdown out;
  out.l_r = g.eval(nodes.l_r, bindings);
  out.l_b = g.eval(nodes.l_b, bindings);
  out.l_0 = g.eval(nodes.l_0, bindings);

  TermValues current{out.l_r, out.l_b, out.l_0, nodes.has_r, nodes.has_b, nodes.has_0};
  out.weights = strategy_weights(strategy, current, previous);

  ExprNode total = g.constant(out.weights[0]) * nodes.l_r +
                   g.constant(out.weights[1]) * nodes.l_b +
                   g.constant(out.weights[2]) * nodes.l_0;
  if (strategy.method == Method::kM5) {
    out.lp_r = g.eval(nodes.lp_r, bindings);
    out.lp_b = g.eval(nodes.lp_b, bindings);
    out.lp_0 = g.eval(nodes.lp_0, bindings);
    total = total + g.constant(strategy.lambda) * (nodes.lp_r + nodes.lp_b + nodes.lp_0);
  }
  out.total = total;
  out.total_value = g.eval(total, bindings);
  if (!std::isfinite(out.total_value)) throw DivergenceError("non-finite loss total");
  return out;
}

// ---------------------------------------------------------------------------
// Batched route
// ---------------------------------------------------------------------------

namespace {
constexpr int kL = BatchExec::kLanes;
}

LossModel::LossModel(const PdeProblem& problem, const Arch& arch, const PointSet& points,
                     int n_threads)
    : problem_(problem), arch_(arch), points_(points) {
  if (arch.input_dim != problem.input_dim())
    throw GraphError("architecture input dim does not match problem");

  std::vector<ExprNode> inputs;
  if (!problem_.stationary) inputs.push_back(graph_.input("t"));
  inputs.push_back(graph_.input("x"));
  ExprNode target = graph_.input("target");
  slot_t_ = graph_.input_slot("t");
  slot_x_ = graph_.input_slot("x");
  slot_target_ = graph_.input_slot("target");
  n_slots_ = static_cast<int>(graph_.input_names().size());

  HeadOutputs heads = build_heads(graph_, arch_, inputs);
  const ExprNode mu = heads.mu;
  const ExprNode s2 = heads.sigma2;

  ExprNode r = residual(problem_, graph_, heads, inputs);
  ExprNode r2 = graph_.powi(r, 2);
  ExprNode mnll_r = graph_.log(s2 + 1.0) + r2 / s2;
  ExprNode nll_r = 0.5 * graph_.log(s2) + r2 / (2.0 * s2);
  ExprNode colloc_roots[3] = {r2, mnll_r, nll_r};
  colloc_exec_ = std::make_unique<BatchExec>(graph_, colloc_roots);

  ExprNode c = mu - target;
  ExprNode c2 = graph_.powi(c, 2);
  ExprNode mnll_c = graph_.log(s2 + 1.0) + c2 / s2;
  ExprNode nll_c = 0.5 * graph_.log(s2) + c2 / (2.0 * s2);
  ExprNode cond_roots[3] = {c2, mnll_c, nll_c};
  cond_exec_ = std::make_unique<BatchExec>(graph_, cond_roots);

  if (!points_.extra.empty()) {
    ExprNode v = graph_.d(mu, "t", 1) - target;
    ExprNode v2 = graph_.powi(v, 2);
    ExprNode vel_roots[1] = {v2};
    vel_exec_ = std::make_unique<BatchExec>(graph_, vel_roots);
  }

  ExprNode pred_roots[2] = {mu, s2};
  pred_exec_ = std::make_unique<BatchExec>(graph_, pred_roots);

  colloc_ = pack(points_.collocation);
  boundary_ = pack_cond(points_.boundary);
  initial_ = pack_cond(points_.initial);
  extra_ = pack_cond(points_.extra);

  mask_.has_r = !points_.collocation.empty();
  mask_.has_b = !points_.boundary.empty();
  mask_.has_0 = !points_.initial.empty() || !points_.extra.empty();

  const int workers = n_threads < 1 ? 1 : n_threads;
  if (workers > 1) pool_ = std::make_unique<ThreadPool>(workers);
  colloc_ws_.reserve(workers);
  cond_ws_.reserve(workers);
  vel_ws_.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    colloc_ws_.push_back(colloc_exec_->make_workspace());
    cond_ws_.push_back(cond_exec_->make_workspace());
    if (vel_exec_) vel_ws_.push_back(vel_exec_->make_workspace());
  }

  const int max_batches = std::max({colloc_.n_batches, boundary_.n_batches, initial_.n_batches,
                                    extra_.n_batches});
  if (pool_) {
    grad_scratch_.assign(static_cast<std::size_t>(max_batches) * param_count(), 0.0);
    sum_scratch_.assign(static_cast<std::size_t>(max_batches) * 3, 0.0);
  }
}

LossModel::SetBatches LossModel::pack(std::span<const Sample2> pts) const {
  SetBatches out;
  out.n_points = static_cast<int>(pts.size());
  out.n_batches = (out.n_points + kL - 1) / kL;
  out.inputs.assign(static_cast<std::size_t>(out.n_batches) * n_slots_ * kL, 0.0);
  out.active.assign(out.n_batches, 0);
  for (int b = 0; b < out.n_batches; ++b) {
    double* base = out.inputs.data() + static_cast<std::size_t>(b) * n_slots_ * kL;
    const int lo = b * kL;
    const int hi = std::min(lo + kL, out.n_points);
    out.active[b] = hi - lo;
    for (int l = 0; l < kL; ++l) {
      const auto& p = pts[std::min(lo + l, out.n_points - 1)];  // pad with last point
      if (slot_t_ >= 0) base[slot_t_ * kL + l] = p.t;
      base[slot_x_ * kL + l] = p.x;
    }
  }
  return out;
}

LossModel::SetBatches LossModel::pack_cond(std::span<const CondSample> pts) const {
  SetBatches out;
  out.n_points = static_cast<int>(pts.size());
  out.n_batches = (out.n_points + kL - 1) / kL;
  out.inputs.assign(static_cast<std::size_t>(out.n_batches) * n_slots_ * kL, 0.0);
  out.active.assign(out.n_batches, 0);
  for (int b = 0; b < out.n_batches; ++b) {
    double* base = out.inputs.data() + static_cast<std::size_t>(b) * n_slots_ * kL;
    const int lo = b * kL;
    const int hi = std::min(lo + kL, out.n_points);
    out.active[b] = hi - lo;
    for (int l = 0; l < kL; ++l) {
      const auto& p = pts[std::min(lo + l, out.n_points - 1)];
      if (slot_t_ >= 0) base[slot_t_ * kL + l] = p.t;
      base[slot_x_ * kL + l] = p.x;
      base[slot_target_ * kL + l] = p.target;
    }
  }
  return out;
}

void LossModel::sweep(const BatchExec& exec, const SetBatches& batches,
                      std::span<const double> theta, std::span<const double> seeds,
                      std::span<double> grad, double* sums,
                      std::vector<BatchExec::Workspace>& ws, bool want_grad) {
  const int n_roots = exec.root_count();
  const int P = param_count();
  bool any_seed = false;
  for (double s : seeds)
    if (s != 0.0) any_seed = true;
  const bool do_grad = want_grad && any_seed;

  auto process = [&](int b, BatchExec::Workspace& w, std::span<double> grad_out, double* sum_out) {
    const double* in = batches.inputs.data() + static_cast<std::size_t>(b) * n_slots_ * kL;
    std::copy(in, in + static_cast<std::size_t>(n_slots_) * kL, w.inputs.data());
    exec.eval(w, theta);
    const int active = batches.active[b];
    for (int r = 0; r < n_roots; ++r) {
      double s = 0.0;
      for (int l = 0; l < active; ++l) s += exec.root_value(w, r, l);
      sum_out[r] = s;
    }
    if (do_grad) exec.backward(w, seeds, active, grad_out);
  };

  if (!pool_) {
    std::vector<double> batch_sums(n_roots);
    for (int b = 0; b < batches.n_batches; ++b) {
      process(b, ws[0], grad, batch_sums.data());
      for (int r = 0; r < n_roots; ++r) sums[r] += batch_sums[r];
    }
    return;
  }

  // Threaded: per-batch scratch, reduced in batch order below so results do
  // not depend on the worker count.
  if (do_grad) {
    for (int b = 0; b < batches.n_batches; ++b) {
      double* g = grad_scratch_.data() + static_cast<std::size_t>(b) * P;
      std::fill(g, g + P, 0.0);
    }
  }
  pool_->run(batches.n_batches, [&](int b, int worker) {
    process(b, ws[worker],
            std::span<double>(grad_scratch_.data() + static_cast<std::size_t>(b) * P, P),
            sum_scratch_.data() + static_cast<std::size_t>(b) * 3);
  });
  for (int b = 0; b < batches.n_batches; ++b) {
    for (int r = 0; r < n_roots; ++r)
      sums[r] += sum_scratch_[static_cast<std::size_t>(b) * 3 + r];
    if (do_grad) {
      const double* g = grad_scratch_.data() + static_cast<std::size_t>(b) * P;
      for (int p = 0; p < P; ++p) grad[p] += g[p];
    }
  }
}

TermSums LossModel::eval_terms(std::span<const double> theta) {
  TermWeights none;
  return eval_and_grad(theta, none, {});
}

TermSums LossModel::eval_and_grad(std::span<const double> theta, const TermWeights& tw,
                                  std::span<double> grad) {
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  TermSums out;
  const double n_r = colloc_.n_points, n_b = boundary_.n_points, n_0 = initial_.n_points,
               n_v = extra_.n_points;

  if (colloc_.n_points > 0) {
    double sums[3] = {0, 0, 0};
    const double seeds[3] = {tw.w_r / n_r, tw.wp_r / n_r, tw.w_nll / n_r};
    sweep(*colloc_exec_, colloc_, theta, seeds, grad, sums, colloc_ws_, want_grad);
    out.l_r = sums[0] / n_r;
    out.lp_r = sums[1] / n_r;
    out.nll += sums[2] / n_r;
  }
  if (boundary_.n_points > 0) {
    double sums[3] = {0, 0, 0};
    const double seeds[3] = {tw.w_b / n_b, tw.wp_b / n_b, tw.w_nll / n_b};
    sweep(*cond_exec_, boundary_, theta, seeds, grad, sums, cond_ws_, want_grad);
    out.l_b = sums[0] / n_b;
    out.lp_b = sums[1] / n_b;
    out.nll += sums[2] / n_b;
  }
  if (initial_.n_points > 0) {
    double sums[3] = {0, 0, 0};
    const double seeds[3] = {tw.w_0 / n_0, tw.wp_0 / n_0, tw.w_nll / n_0};
    sweep(*cond_exec_, initial_, theta, seeds, grad, sums, cond_ws_, want_grad);
    out.l_0 = sums[0] / n_0;
    out.lp_0 = sums[1] / n_0;
    out.nll += sums[2] / n_0;
  }
  if (extra_.n_points > 0 && vel_exec_) {
    double sums[1] = {0};
    const double seeds[1] = {tw.w_0 / n_v};
    sweep(*vel_exec_, extra_, theta, seeds, grad, sums, vel_ws_, want_grad);
    out.l_0 += sums[0] / n_v;
  }
  return out;
}

void LossModel::prepare_prediction(std::span<const Sample2> points) {
  pred_ = pack(points);
  pred_ws_.clear();
  pred_ws_.push_back(pred_exec_->make_workspace());
}

void LossModel::predict(std::span<const double> theta, std::vector<double>& mu_out,
                        std::vector<double>& sigma2_out) {
  if (pred_ws_.empty()) throw GraphError("prepare_prediction was not called");
  mu_out.resize(pred_.n_points);
  sigma2_out.resize(pred_.n_points);
  auto& w = pred_ws_[0];
  for (int b = 0; b < pred_.n_batches; ++b) {
    const double* in = pred_.inputs.data() + static_cast<std::size_t>(b) * n_slots_ * kL;
    std::copy(in, in + static_cast<std::size_t>(n_slots_) * kL, w.inputs.data());
    pred_exec_->eval(w, theta);
    for (int l = 0; l < pred_.active[b]; ++l) {
      mu_out[b * kL + l] = pred_exec_->root_value(w, 0, l);
      sigma2_out[b * kL + l] = pred_exec_->root_value(w, 1, l);
    }
  }
}

}  // namespace pinn

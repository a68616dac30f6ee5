#include "pinn/trainer.hpp"

#include <chrono>
#include <cmath>

#include "pinn/adam.hpp"
#include "pinn/sampler.hpp"

namespace pinn {

namespace {
// All runs of an experiment share one training dataset; only initialization
// varies with the run seed.
constexpr std::uint64_t kDataStreamSeed = 0xda7a5eedull;
}  // namespace

std::pair<double, double> metrics(std::span<const double> predictions,
                                  std::span<const double> references) {
  if (predictions.size() != references.size() || predictions.empty())
    throw GraphError("metrics: size mismatch or empty inputs");
  double sq = 0.0, ref_sq = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = references[i] - predictions[i];
    sq += d * d;
    ref_sq += references[i] * references[i];
  }
  const double mse = sq / static_cast<double>(predictions.size());
  if (ref_sq == 0.0) throw GraphError("L2-error undefined: zero reference norm");
  return {mse, std::sqrt(sq) / std::sqrt(ref_sq)};
}

RunReport train(const TrainConfig& config, std::uint64_t seed, const BurgersReference* oracle,
                std::vector<double>* final_params) {
  if (config.iterations < 1) throw GraphError("iterations must be >= 1");
  if (config.counts.collocation < 1) throw GraphError("need at least one collocation point");

  const PdeProblem& problem = find_problem(config.problem);
  Arch arch;
  arch.input_dim = problem.input_dim();
  arch.hidden = config.hidden;

  NetParams net = init_xavier(arch, seed);
  const PointSet points = sample_training(problem, config.counts, kDataStreamSeed);
  const TestGrid grid = test_grid(problem, config.test_points, oracle);

  LossModel model(problem, arch, points, config.threads);
  model.prepare_prediction(grid.points);

  AdamState adam(arch.param_count(), config.lr, config.beta1, config.beta2, config.eps);
  std::vector<double> grad(arch.param_count(), 0.0);
  std::vector<double> mu_out, sigma2_out;

  RunReport report;
  report.seed = seed;

  const WeightStrategy& strategy = config.strategy;
  const bool adaptive = strategy.method == Method::kM3 || strategy.method == Method::kM4;
  const TermValues& mask = model.term_mask();
  TermValues previous;
  bool has_previous = false;

  const auto t0 = std::chrono::steady_clock::now();
  for (int it = 1; it <= config.iterations; ++it) {
    std::array<double, 3> w{1.0, 1.0, 1.0};
    if (adaptive) {
      const TermSums cur = model.eval_terms(net.theta);
      TermValues current{cur.l_r, cur.l_b, cur.l_0, mask.has_r, mask.has_b, mask.has_0};
      w = strategy_weights(strategy, current, has_previous ? &previous : nullptr);
    } else {
      TermValues dummy{0, 0, 0, mask.has_r, mask.has_b, mask.has_0};
      w = strategy_weights(strategy, dummy, nullptr);
    }

    LossModel::TermWeights tw;
    tw.w_r = w[0];
    tw.w_b = w[1];
    tw.w_0 = w[2];
    if (strategy.method == Method::kM5)
      tw.wp_r = tw.wp_b = tw.wp_0 = strategy.lambda;

    const TermSums sums = model.eval_and_grad(net.theta, tw, grad);
    double total = w[0] * sums.l_r + w[1] * sums.l_b + w[2] * sums.l_0;
    if (strategy.method == Method::kM5)
      total += strategy.lambda * (sums.lp_r + sums.lp_b + sums.lp_0);

    if (!std::isfinite(total)) {
      report.failed = true;
      report.fail_iteration = it;
      report.fail_reason = "non-finite loss";
      break;
    }
    try {
      adam_step(adam, net.theta, grad);
    } catch (const GradError& e) {
      report.failed = true;
      report.fail_iteration = it;
      report.fail_reason = e.what();
      break;
    }

    previous = TermValues{sums.l_r, sums.l_b, sums.l_0, mask.has_r, mask.has_b, mask.has_0};
    has_previous = true;

    if (it % config.metric_interval == 0 || it == config.iterations) {
      model.predict(net.theta, mu_out, sigma2_out);
      const auto [mse, l2] = metrics(mu_out, grid.reference);
      CheckpointRecord rec;
      rec.iteration = it;
      rec.l_r = sums.l_r;
      rec.l_b = sums.l_b;
      rec.l_0 = sums.l_0;
      rec.lp_r = sums.lp_r;
      rec.lp_b = sums.lp_b;
      rec.lp_0 = sums.lp_0;
      rec.mse = mse;
      rec.l2 = l2;
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
      report.curve.push_back(rec);
    }
  }

  if (!report.failed && !report.curve.empty()) {
    report.final_mse = report.curve.back().mse;
    report.final_l2 = report.curve.back().l2;
  }
  if (final_params != nullptr) *final_params = net.theta;
  return report;
}

AggregateReport aggregate(std::span<const RunReport> reports) {
  AggregateReport agg;
  agg.n_runs = static_cast<int>(reports.size());
  bool first = true;
  double sum_mse = 0.0, sum_l2 = 0.0;
  int n_ok = 0;
  for (const auto& r : reports) {
    if (r.failed) {
      agg.n_failed += 1;
      continue;
    }
    n_ok += 1;
    sum_mse += r.final_mse;
    sum_l2 += r.final_l2;
    if (first) {
      agg.min_mse = agg.max_mse = r.final_mse;
      agg.min_l2 = agg.max_l2 = r.final_l2;
      first = false;
    } else {
      agg.min_mse = std::min(agg.min_mse, r.final_mse);
      agg.max_mse = std::max(agg.max_mse, r.final_mse);
      agg.min_l2 = std::min(agg.min_l2, r.final_l2);
      agg.max_l2 = std::max(agg.max_l2, r.final_l2);
    }
  }
  if (n_ok == 0) throw GraphError("all runs failed; nothing to aggregate");
  agg.mean_mse = sum_mse / n_ok;
  agg.mean_l2 = sum_l2 / n_ok;
  return agg;
}

}  // namespace pinn

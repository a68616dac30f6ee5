#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pinn/losses.hpp"
#include "pinn/oracle.hpp"

namespace pinn {

struct TrainConfig {
  std::string problem = "advection";
  WeightStrategy strategy;
  Counts counts{500, 100, 100, 0};
  int iterations = 8000;
  std::vector<int> hidden{30, 30, 30};
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int metric_interval = 100;
  int test_points = 5000;
  int threads = 1;  // batch workers inside one run; does not change numerics
};

struct CheckpointRecord {
  int iteration = 0;
  double l_r = 0, l_b = 0, l_0 = 0;
  double lp_r = 0, lp_b = 0, lp_0 = 0;
  double mse = 0, l2 = 0;
  double wall_ms = 0;  // measured; the only non-reproducible field
};

struct RunReport {
  std::uint64_t seed = 0;
  bool failed = false;
  int fail_iteration = -1;
  std::string fail_reason;
  std::vector<CheckpointRecord> curve;
  double final_mse = std::numeric_limits<double>::quiet_NaN();
  double final_l2 = std::numeric_limits<double>::quiet_NaN();
};

struct AggregateReport {
  int n_runs = 0;
  int n_failed = 0;
  double mean_mse = 0, min_mse = 0, max_mse = 0;
  double mean_l2 = 0, min_l2 = 0, max_l2 = 0;
};

/// (MSE, relative L2 error) of predictions against references.
std::pair<double, double> metrics(std::span<const double> predictions,
                                  std::span<const double> references);

/// One full deterministic training run. The training dataset is drawn from a
/// fixed stream so every run of an experiment trains on the same points; the
/// run seed varies the initialization. Optional `final_params` receives the
/// trained parameter vector.
RunReport train(const TrainConfig& config, std::uint64_t seed,
                const BurgersReference* oracle = nullptr,
                std::vector<double>* final_params = nullptr);

/// Mean/min/max of final errors over the successful runs; throws when all
/// runs failed.
AggregateReport aggregate(std::span<const RunReport> reports);

}  // namespace pinn

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pinn/trainer.hpp"

namespace pinn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed experiment file: a TrainConfig plus the method list (one entry for
/// `run`, several for `compare`) and the output directory.
struct ExperimentConfig {
  TrainConfig base;             // strategy.method holds methods.front()
  std::vector<Method> methods;  // validated, duplicate-free
  std::string out_dir = "out";
};

/// Flat key=value format with '#' comments. Unknown keys are rejected, and
/// method parameters (lambda/c0/beta) are only accepted when the matching
/// method is listed.
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Grid study description: one or two axes over a base experiment.
struct GridSpec {
  enum class Kind { kPoints, kArch, kLambda };
  Kind kind = Kind::kLambda;
  std::vector<int> nu_values;       // points: boundary = initial = nu
  std::vector<int> nf_values;       // points: collocation = nf
  std::vector<int> layers_values;   // arch
  std::vector<int> neurons_values;  // arch
  std::vector<double> lambda_values;
  ExperimentConfig base;
};
GridSpec parse_grid_file(const std::filesystem::path& path);

}  // namespace pinn

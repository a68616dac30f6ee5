#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pinn/graph.hpp"

namespace pinn {

/// Floor added to the transformed variance head.
inline constexpr double kVarianceFloor = 1e-6;

/// Fully connected architecture: input -> hidden... -> 2 outputs
/// (predicted mean and raw variance).
struct Arch {
  int input_dim = 2;
  std::vector<int> hidden{30, 30, 30};
  static constexpr int output_dim = 2;

  std::vector<int> layer_sizes() const;
  int param_count() const;
  bool operator==(const Arch&) const = default;
};

struct NetParams {
  Arch arch;
  std::vector<double> theta;  // [W1 row-major, b1, W2, b2, ...]
};

/// Expression handles for the two heads. `sigma2` is already transformed:
/// softplus(raw) + 1e-6, so it is positive everywhere by construction.
struct HeadOutputs {
  ExprNode mu;
  ExprNode sigma2;
};

/// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
/// Bit-deterministic per seed.
NetParams init_xavier(const Arch& arch, std::uint64_t seed);

/// Builds the shared tanh trunk and both heads over the given input leaves,
/// creating parameter leaves 0..param_count-1 in checkpoint order.
HeadOutputs build_heads(Graph& g, const Arch& arch, std::span<const ExprNode> inputs);

/// Binary checkpoint: magic, layer sizes, raw little-endian doubles.
/// Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const NetParams& params);
NetParams load_checkpoint(const std::filesystem::path& path);

}  // namespace pinn

#include "pinn/net.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pinn/rng.hpp"

namespace pinn {

std::vector<int> Arch::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output_dim);
  return sizes;
}

int Arch::param_count() const {
  const auto sizes = layer_sizes();
  int count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    count += sizes[l] * sizes[l + 1] + sizes[l + 1];
  return count;
}

NetParams init_xavier(const Arch& arch, std::uint64_t seed) {
  const auto sizes = arch.layer_sizes();
  for (int s : sizes)
    if (s < 1) throw GraphError("layer sizes must be >= 1");

  NetParams params;
  params.arch = arch;
  params.theta.reserve(arch.param_count());
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l], fan_out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i)
      params.theta.push_back(rng.uniform(-bound, bound));
    for (int i = 0; i < fan_out; ++i) params.theta.push_back(0.0);
  }
  return params;
}

HeadOutputs build_heads(Graph& g, const Arch& arch, std::span<const ExprNode> inputs) {
  if (static_cast<int>(inputs.size()) != arch.input_dim)
    throw GraphError("input count does not match architecture input dim");
  const auto sizes = arch.layer_sizes();
  for (int s : sizes)
    if (s < 1) throw GraphError("layer sizes must be >= 1");

  std::vector<ExprNode> act(inputs.begin(), inputs.end());
  int p = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l], fan_out = sizes[l + 1];
    const bool last = l + 2 == sizes.size();
    std::vector<ExprNode> next(fan_out);
    for (int i = 0; i < fan_out; ++i) {
      ExprNode z = g.mul(g.param(p + i * fan_in), act[0]);
      for (int j = 1; j < fan_in; ++j)
        z = g.add(z, g.mul(g.param(p + i * fan_in + j), act[j]));
      z = g.add(z, g.param(p + fan_out * fan_in + i));
      next[i] = last ? z : g.tanh(z);
    }
    p += fan_out * fan_in + fan_out;
    act = std::move(next);
  }
  HeadOutputs heads;
  heads.mu = act[0];
  heads.sigma2 = g.add(g.softplus(act[1]), g.constant(kVarianceFloor));
  return heads;
}

namespace {
constexpr char kMagic[8] = {'P', 'I', 'N', 'N', 'N', 'E', 'T', '1'};
}

void save_checkpoint(const std::filesystem::path& path, const NetParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GraphError("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const auto sizes = params.arch.layer_sizes();
  const std::uint32_t n = static_cast<std::uint32_t>(sizes.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (int s : sizes) {
    const std::int32_t v = s;
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  out.write(reinterpret_cast<const char*>(params.theta.data()),
            static_cast<std::streamsize>(params.theta.size() * sizeof(double)));
  if (!out) throw GraphError("checkpoint write failed: " + path.string());
}

NetParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw GraphError("bad checkpoint header: " + path.string());
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n < 2 || n > 64) throw GraphError("bad checkpoint layer count");
  std::vector<int> sizes(n);
  for (auto& s : sizes) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    s = v;
  }
  NetParams params;
  params.arch.input_dim = sizes.front();
  params.arch.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  if (sizes.back() != Arch::output_dim) throw GraphError("checkpoint output dim must be 2");
  params.theta.resize(params.arch.param_count());
  in.read(reinterpret_cast<char*>(params.theta.data()),
          static_cast<std::streamsize>(params.theta.size() * sizeof(double)));
  if (!in) throw GraphError("truncated checkpoint: " + path.string());
  return params;
}

}  // namespace pinn

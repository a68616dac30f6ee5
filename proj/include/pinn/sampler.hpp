#pragma once

#include <cstdint>
#include <vector>

#include "pinn/oracle.hpp"
#include "pinn/problems.hpp"

namespace pinn {

struct Counts {
  int collocation = 0;
  int boundary = 0;
  int initial = 0;
  int extra = 0;  // initial-derivative points (wave)
};

struct Sample2 {
  double t = 0.0;
  double x = 0.0;
};

/// A condition sample with its precomputed target value.
struct CondSample {
  double t = 0.0;
  double x = 0.0;
  double target = 0.0;
};

struct PointSet {
  std::vector<Sample2> collocation;
  std::vector<CondSample> boundary;
  std::vector<CondSample> initial;
  std::vector<CondSample> extra;
};

/// Uniform sampling of training points, bit-deterministic per seed.
/// Boundary points split evenly across the two edges (odd remainder to the
/// lower edge); Poisson always gets exactly its two domain endpoints.
PointSet sample_training(const PdeProblem& problem, const Counts& counts, std::uint64_t seed);

/// Deterministic evaluation grid paired with reference values. 2-D problems
/// get a tensor grid with about n points (Burgers is pinned to the reference
/// grid), 1-D problems n equispaced points.
struct TestGrid {
  int n_t = 1;
  int n_x = 1;
  std::vector<Sample2> points;    // t-major
  std::vector<double> reference;  // same order
};
TestGrid test_grid(const PdeProblem& problem, int n, const BurgersReference* oracle = nullptr);

}  // namespace pinn

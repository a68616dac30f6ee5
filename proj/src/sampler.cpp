#include "pinn/sampler.hpp"

#include <cmath>

#include "pinn/rng.hpp"

namespace pinn {

PointSet sample_training(const PdeProblem& problem, const Counts& counts, std::uint64_t seed) {
  if (counts.collocation < 0 || counts.boundary < 0 || counts.initial < 0 || counts.extra < 0)
    throw GraphError("point counts must be non-negative");
  if (problem.initial.size() > 1 || problem.velocity.size() > 1)
    throw GraphError("at most one initial/velocity condition is supported");

  Rng base(seed);
  PointSet set;

  {
    Rng rng = base.fork(1);
    set.collocation.reserve(counts.collocation);
    for (int i = 0; i < counts.collocation; ++i) {
      Sample2 s;
      if (!problem.stationary) s.t = rng.uniform(0.0, problem.t_max);
      s.x = rng.uniform(problem.x_lo, problem.x_hi);
      set.collocation.push_back(s);
    }
  }

  {
    Rng rng = base.fork(2);
    if (problem.name == "poisson") {
      // Two endpoints suffice for the stationary 1-D problem.
      for (const auto& spec : problem.boundary)
        set.boundary.push_back({0.0, spec.x_fixed, spec.target(0.0, spec.x_fixed)});
    } else {
      const int n_lo = (counts.boundary + 1) / 2;
      for (std::size_t e = 0; e < problem.boundary.size(); ++e) {
        const auto& spec = problem.boundary[e];
        const int n_e = e == 0 ? n_lo : counts.boundary - n_lo;
        for (int i = 0; i < n_e; ++i) {
          const double t = problem.stationary ? 0.0 : rng.uniform(0.0, problem.t_max);
          set.boundary.push_back({t, spec.x_fixed, spec.target(t, spec.x_fixed)});
        }
      }
    }
  }

  if (!problem.initial.empty()) {
    Rng rng = base.fork(3);
    const auto& spec = problem.initial.front();
    for (int i = 0; i < counts.initial; ++i) {
      const double x = rng.uniform(problem.x_lo, problem.x_hi);
      set.initial.push_back({0.0, x, spec.target(0.0, x)});
    }
  }

  if (!problem.velocity.empty()) {
    Rng rng = base.fork(4);
    const auto& spec = problem.velocity.front();
    for (int i = 0; i < counts.extra; ++i) {
      const double x = rng.uniform(problem.x_lo, problem.x_hi);
      set.extra.push_back({0.0, x, spec.target(0.0, x)});
    }
  }

  return set;
}

TestGrid test_grid(const PdeProblem& problem, int n, const BurgersReference* oracle) {
  TestGrid grid;
  if (!problem.has_exact) {
    if (oracle == nullptr)
      throw OracleOnlyError("reference for '" + problem.name + "' not generated yet");
    grid.n_t = oracle->n_t;
    grid.n_x = oracle->n_x;
    grid.points.reserve(oracle->u.size());
    for (int it = 0; it < grid.n_t; ++it)
      for (int ix = 0; ix < grid.n_x; ++ix)
        grid.points.push_back({oracle->t_of(it), oracle->x_of(ix)});
    grid.reference = oracle->u;
    return grid;
  }

  if (n < 2) throw GraphError("test grid needs at least 2 points");
  if (problem.stationary) {
    grid.n_t = 1;
    grid.n_x = n;
    for (int i = 0; i < n; ++i) {
      const double x = problem.x_lo + (problem.x_hi - problem.x_lo) * i / (n - 1);
      grid.points.push_back({0.0, x});
      grid.reference.push_back(problem.exact_fn(0.0, x));
    }
    return grid;
  }

  grid.n_x = std::max(2, static_cast<int>(std::lround(std::sqrt(2.0 * n))));
  grid.n_t = std::max(2, n / grid.n_x);
  for (int it = 0; it < grid.n_t; ++it) {
    const double t = problem.t_max * it / (grid.n_t - 1);
    for (int ix = 0; ix < grid.n_x; ++ix) {
      const double x = problem.x_lo + (problem.x_hi - problem.x_lo) * ix / (grid.n_x - 1);
      grid.points.push_back({t, x});
      grid.reference.push_back(problem.exact_fn(t, x));
    }
  }
  return grid;
}

}  // namespace pinn

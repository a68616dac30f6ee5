#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "pinn/checks.hpp"
#include "pinn/config.hpp"
#include "pinn/report.hpp"
#include "pinn/thread_pool.hpp"

namespace fs = std::filesystem;
using namespace pinn;

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::string seed_override;
  std::string burgers_cache;
  int jobs = 1;
  int threads = 1;
};

void apply_overrides(ExperimentConfig& cfg, const CommonOpts& opts) {
  if (!opts.out.empty()) cfg.out_dir = opts.out;
  if (!opts.seed_override.empty()) {
    cfg.base.seeds.clear();
    std::size_t start = 0;
    const std::string& s = opts.seed_override;
    while (start <= s.size()) {
      const auto pos = s.find(',', start);
      const std::string tok = s.substr(start, pos == std::string::npos ? pos : pos - start);
      if (!tok.empty()) cfg.base.seeds.push_back(std::stoull(tok));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (cfg.base.seeds.empty()) throw ConfigError("--seed-override produced no seeds");
  }
  cfg.base.threads = opts.threads;
}

std::optional<BurgersReference> maybe_oracle(const ExperimentConfig& cfg,
                                             const CommonOpts& opts) {
  if (cfg.base.problem != "burgers") return std::nullopt;
  const fs::path cache = opts.burgers_cache.empty()
                             ? fs::path(cfg.out_dir) / "burgers_reference.bin"
                             : fs::path(opts.burgers_cache);
  return load_or_compute_burgers(cache);
}

/// Trains the (method x seed) matrix through a worker pool; one run is
/// single-threaded unless --threads asks otherwise.
struct RunOutput {
  RunReport report;
  std::vector<double> theta;
};

std::vector<std::vector<RunOutput>> run_matrix(const ExperimentConfig& cfg,
                                               const std::vector<Method>& methods,
                                               const BurgersReference* oracle, int jobs) {
  const auto& seeds = cfg.base.seeds;
  std::vector<std::vector<RunOutput>> out(methods.size());
  for (auto& v : out) v.resize(seeds.size());
  struct Item {
    std::size_t m, s;
  };
  std::vector<Item> items;
  for (std::size_t m = 0; m < methods.size(); ++m)
    for (std::size_t s = 0; s < seeds.size(); ++s) items.push_back({m, s});

  ThreadPool pool(jobs);
  std::atomic<bool> had_error{false};
  std::string first_error;
  std::mutex err_mutex;
  pool.run(static_cast<int>(items.size()), [&](int i, int) {
    const Item it = items[i];
    TrainConfig tc = cfg.base;
    tc.strategy.method = methods[it.m];
    try {
      out[it.m][it.s].report =
          train(tc, seeds[it.s], oracle, &out[it.m][it.s].theta);
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mutex);
      if (!had_error.exchange(true)) first_error = e.what();
    }
  });
  if (had_error) throw GraphError("run failed: " + first_error);
  return out;
}

void write_run_outputs(const ExperimentConfig& cfg, Method method,
                       const std::vector<RunOutput>& runs, const BurgersReference* oracle) {
  const fs::path dir(cfg.out_dir);
  const std::string mname(method_name(method));
  const auto& seeds = cfg.base.seeds;

  for (std::size_t s = 0; s < runs.size(); ++s) {
    const auto name = "curve_" + cfg.base.problem + "_" + mname + "_seed" +
                      std::to_string(seeds[s]) + ".csv";
    atomic_write(dir / name, curve_csv(runs[s].report));
  }

  std::vector<RunReport> reports;
  for (const auto& r : runs) reports.push_back(r.report);
  const AggregateReport agg = aggregate(reports);
  const std::string names[1] = {mname};
  const AggregateReport aggs[1] = {agg};
  atomic_write(dir / ("aggregate_" + cfg.base.problem + "_" + mname + ".csv"),
               aggregate_csv(names, aggs));

  // Error field for the best run (smallest final L2).
  int best = -1;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    if (runs[s].report.failed) continue;
    if (best < 0 || runs[s].report.final_l2 < runs[best].report.final_l2)
      best = static_cast<int>(s);
  }
  if (best >= 0) {
    const PdeProblem& problem = find_problem(cfg.base.problem);
    Arch arch;
    arch.input_dim = problem.input_dim();
    arch.hidden = cfg.base.hidden;
    const TestGrid grid = test_grid(problem, cfg.base.test_points, oracle);
    LossModel predictor(problem, arch, PointSet{}, 1);
    predictor.prepare_prediction(grid.points);
    std::vector<double> mu, s2;
    predictor.predict(runs[best].theta, mu, s2);
    atomic_write(dir / ("error_field_" + cfg.base.problem + "_" + mname + ".csv"),
                 error_field_csv(grid, mu, s2));
  }
}

int failures_in(const std::vector<std::vector<RunOutput>>& matrix) {
  int n = 0;
  for (const auto& row : matrix)
    for (const auto& r : row)
      if (r.report.failed) ++n;
  return n;
}

int cmd_run(const CommonOpts& opts) {
  ExperimentConfig cfg = parse_config_file(opts.config);
  if (cfg.methods.size() != 1)
    throw ConfigError("'run' expects a single method; use 'compare' for several");
  apply_overrides(cfg, opts);
  const auto oracle = maybe_oracle(cfg, opts);
  const auto matrix = run_matrix(cfg, cfg.methods, oracle ? &*oracle : nullptr, opts.jobs);
  write_run_outputs(cfg, cfg.methods[0], matrix[0], oracle ? &*oracle : nullptr);
  const int failed = failures_in(matrix);
  if (failed > 0) {
    std::cerr << failed << " run(s) diverged; outputs cover the remaining seeds\n";
    return 3;
  }
  return 0;
}

int cmd_compare(const CommonOpts& opts, bool allow_m4) {
  ExperimentConfig cfg = parse_config_file(opts.config);
  if (cfg.methods.size() < 2) throw ConfigError("'compare' expects at least two methods");
  apply_overrides(cfg, opts);
  if (cfg.base.problem == "poisson" && !allow_m4) {
    for (Method m : cfg.methods)
      if (m == Method::kM4)
        throw ConfigError(
            "m4 on poisson is disabled by default (loss deltas overflow the softmax); "
            "pass --allow-m4 to force it");
  }
  const auto oracle = maybe_oracle(cfg, opts);
  const auto matrix = run_matrix(cfg, cfg.methods, oracle ? &*oracle : nullptr, opts.jobs);

  std::vector<std::string> names;
  std::vector<AggregateReport> aggs;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    names.emplace_back(method_name(cfg.methods[m]));
    std::vector<RunReport> reports;
    for (const auto& r : matrix[m]) reports.push_back(r.report);
    aggs.push_back(aggregate(reports));
    write_run_outputs(cfg, cfg.methods[m], matrix[m], oracle ? &*oracle : nullptr);
  }
  atomic_write(fs::path(cfg.out_dir) / ("compare_" + cfg.base.problem + ".csv"),
               aggregate_csv(names, aggs));
  const int failed = failures_in(matrix);
  if (failed > 0) {
    std::cerr << failed << " run(s) diverged; statistics cover the remaining seeds\n";
    return 3;
  }
  return 0;
}

int cmd_grid(const CommonOpts& opts) {
  GridSpec spec = parse_grid_file(opts.config);
  apply_overrides(spec.base, opts);
  const auto oracle = maybe_oracle(spec.base, opts);

  struct Cell {
    TrainConfig config;
    std::string row, col;
  };
  std::vector<Cell> cells;
  std::vector<std::string> row_labels, col_labels;
  switch (spec.kind) {
    case GridSpec::Kind::kPoints:
      for (int nu : spec.nu_values) row_labels.push_back(std::to_string(nu));
      for (int nf : spec.nf_values) col_labels.push_back(std::to_string(nf));
      for (int nu : spec.nu_values)
        for (int nf : spec.nf_values) {
          TrainConfig tc = spec.base.base;
          tc.counts.collocation = nf;
          tc.counts.boundary = nu;
          tc.counts.initial = nu;
          cells.push_back({tc, std::to_string(nu), std::to_string(nf)});
        }
      break;
    case GridSpec::Kind::kArch:
      for (int l : spec.layers_values) row_labels.push_back(std::to_string(l));
      for (int n : spec.neurons_values) col_labels.push_back(std::to_string(n));
      for (int l : spec.layers_values)
        for (int n : spec.neurons_values) {
          TrainConfig tc = spec.base.base;
          tc.hidden.assign(l, n);
          cells.push_back({tc, std::to_string(l), std::to_string(n)});
        }
      break;
    case GridSpec::Kind::kLambda:
      for (double lv : spec.lambda_values) {
        TrainConfig tc = spec.base.base;
        tc.strategy.lambda = lv;
        cells.push_back({tc, format_double(lv), ""});
      }
      break;
  }

  // Flatten (cell x seed) into one deterministic job list.
  const auto& seeds = spec.base.base.seeds;
  std::vector<RunReport> reports(cells.size() * seeds.size());
  struct Item {
    std::size_t c, s;
  };
  std::vector<Item> items;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t s = 0; s < seeds.size(); ++s) items.push_back({c, s});
  ThreadPool pool(opts.jobs);
  std::atomic<bool> had_error{false};
  std::string first_error;
  std::mutex err_mutex;
  pool.run(static_cast<int>(items.size()), [&](int i, int) {
    const Item it = items[i];
    try {
      reports[it.c * seeds.size() + it.s] =
          train(cells[it.c].config, seeds[it.s], oracle ? &*oracle : nullptr);
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mutex);
      if (!had_error.exchange(true)) first_error = e.what();
    }
  });
  if (had_error) throw GraphError("grid run failed: " + first_error);

  int failed = 0;
  std::vector<double> cell_mean(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::span<const RunReport> cell(reports.data() + c * seeds.size(), seeds.size());
    for (const auto& r : cell)
      if (r.failed) ++failed;
    cell_mean[c] = aggregate(cell).mean_l2;
  }

  const fs::path dir(spec.base.out_dir);
  std::string kind_name, csv;
  if (spec.kind == GridSpec::Kind::kLambda) {
    kind_name = "lambda";
    std::vector<std::pair<std::string, double>> rows;
    for (std::size_t c = 0; c < cells.size(); ++c) rows.emplace_back(cells[c].row, cell_mean[c]);
    csv = pairs_csv("lambda", "mean_l2", rows);
  } else {
    kind_name = spec.kind == GridSpec::Kind::kPoints ? "points" : "arch";
    const std::string corner = spec.kind == GridSpec::Kind::kPoints ? "nu\\nf" : "layers\\neurons";
    std::vector<std::vector<double>> cells2d(row_labels.size(),
                                             std::vector<double>(col_labels.size()));
    for (std::size_t r = 0; r < row_labels.size(); ++r)
      for (std::size_t cc = 0; cc < col_labels.size(); ++cc)
        cells2d[r][cc] = cell_mean[r * col_labels.size() + cc];
    csv = matrix_csv(corner, col_labels, row_labels, cells2d);
  }
  atomic_write(dir / ("grid_" + kind_name + "_" + spec.base.base.problem + ".csv"), csv);
  if (failed > 0) {
    std::cerr << failed << " run(s) diverged\n";
    return 3;
  }
  return 0;
}

int cmd_check(double fd_tol, const std::string& burgers_cache) {
  bool all_ok = true;
  auto line = [&](bool ok, const std::string& name, const std::string& detail) {
    std::printf("[%s] %-44s %s\n", ok ? " ok " : "FAIL", name.c_str(), detail.c_str());
    if (!ok) all_ok = false;
  };

  // Gradient fidelity of every loss on every problem, small random net.
  const std::optional<WeightStrategy> kinds[6] = {
      WeightStrategy{Method::kM1},          WeightStrategy{Method::kM2, 100.0},
      WeightStrategy{Method::kM3},          WeightStrategy{Method::kM4, 100.0, 0.1},
      WeightStrategy{Method::kM5, 100.0, 0.1, 1.0}, std::nullopt};
  const char* kind_names[6] = {"m1", "m2", "m3", "m4", "m5", "nll"};
  for (const auto& problem : catalog()) {
    Arch arch;
    arch.input_dim = problem.input_dim();
    arch.hidden = {10, 10};
    Counts counts{16, 8, problem.initial.empty() ? 0 : 8, problem.velocity.empty() ? 0 : 8};
    for (int k = 0; k < 6; ++k) {
      const auto rep = fd_check_loss(problem, kinds[k], arch, counts, 7, 1e-4, fd_tol);
      line(rep.pass, "grad " + problem.name + " " + kind_names[k],
           "max rel err " + format_double(rep.max_rel_error));
    }
  }

  {
    const double err = adam_equivalence_error(5, 10, 11);
    line(err < 1e-12, "adam reference equivalence", "max |diff| " + format_double(err));
  }

  // Exact solutions pushed through residual and condition targets. The wave
  // and convection-diffusion reference solutions satisfy their boundary /
  // initial-derivative conditions only approximately (far-field image
  // construction), so those checks use the analytic floors.
  struct Bound {
    const char* name;
    double pde, bc, ic, vel;
  };
  const Bound bounds[4] = {{"advection", 1e-6, 1e-10, 1e-10, 0.0},
                           {"convection_diffusion", 1e-6, 1e-8, 1e-10, 0.0},
                           {"poisson", 1e-6, 1e-10, 0.0, 0.0},
                           {"wave", 1e-6, 5e-4, 1e-10, 1.5e-3}};
  for (const auto& bound : bounds) {
    const auto& problem = find_problem(bound.name);
    const auto rep = manufactured_report(problem, 200, 3);
    line(rep.max_pde < bound.pde, std::string("exact-solution pde ") + bound.name,
         "max |residual| " + format_double(rep.max_pde));
    line(rep.max_bc < bound.bc, std::string("exact-solution bc ") + bound.name,
         "max |residual| " + format_double(rep.max_bc));
    if (rep.has_ic)
      line(rep.max_ic < bound.ic, std::string("exact-solution ic ") + bound.name,
           "max |residual| " + format_double(rep.max_ic));
    if (rep.has_vel)
      line(rep.max_vel < bound.vel, std::string("exact-solution velocity-ic ") + bound.name,
           "max |residual| " + format_double(rep.max_vel));
  }

  // Burgers reference: recompute (self-convergence is checked inside),
  // validate symmetry and the initial profile, refresh the cache.
  try {
    const BurgersReference ref = burgers_reference();
    double max_sym = 0.0, max_ic = 0.0, max_abs = 0.0;
    for (int it = 0; it < ref.n_t; ++it)
      for (int ix = 0; ix < ref.n_x; ++ix) {
        max_sym = std::max(max_sym, std::abs(ref.at(it, ix) + ref.at(it, ref.n_x - 1 - ix)));
        max_abs = std::max(max_abs, std::abs(ref.at(it, ix)));
      }
    for (int ix = 0; ix < ref.n_x; ++ix)
      max_ic = std::max(max_ic,
                        std::abs(ref.at(0, ix) + std::sin(std::numbers::pi * ref.x_of(ix))));
    line(true, "burgers quadrature self-convergence", "order 100 vs 200 < 1e-6");
    line(max_sym < 1e-6, "burgers odd symmetry", "max " + format_double(max_sym));
    line(max_ic < 1e-6, "burgers initial profile", "max " + format_double(max_ic));
    line(max_abs <= 1.0 + 1e-9, "burgers max principle", "max |u| " + format_double(max_abs));
    const fs::path cache =
        burgers_cache.empty() ? fs::path("burgers_reference.bin") : fs::path(burgers_cache);
    save_burgers_reference(cache, ref);
    const BurgersReference back = load_burgers_reference(cache);
    line(back.u == ref.u, "burgers cache round-trip", cache.string());
  } catch (const std::exception& e) {
    line(false, "burgers reference", e.what());
  }

  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PINN benchmark toolkit: five PDE benchmarks, five loss-weighting methods"};
  app.require_subcommand(1);

  CommonOpts opts;
  double fd_tol = 1e-5;
  bool allow_m4 = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", opts.config, "experiment file")->required();
    cmd->add_option("--out", opts.out, "output directory (overrides config)");
    cmd->add_option("--jobs", opts.jobs, "parallel runs")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", opts.threads, "batch workers per run")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed-override", opts.seed_override, "comma-separated seed list");
    cmd->add_option("--burgers-cache", opts.burgers_cache, "reference cache path");
  };

  auto* run = app.add_subcommand("run", "train one method, emit curves and statistics");
  add_common(run, true);
  auto* compare = app.add_subcommand("compare", "train several methods, emit a comparison table");
  add_common(compare, true);
  compare->add_flag("--allow-m4", allow_m4, "allow SoftAdapt on the poisson problem");
  auto* grid = app.add_subcommand("grid", "sweep points/architecture/lambda");
  add_common(grid, true);
  auto* check = app.add_subcommand("check", "run the verification suite");
  check->add_option("--fd-tol", fd_tol, "gradient-check tolerance");
  check->add_option("--burgers-cache", opts.burgers_cache, "reference cache path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opts);
    if (compare->parsed()) return cmd_compare(opts, allow_m4);
    if (grid->parsed()) return cmd_grid(opts);
    if (check->parsed()) return cmd_check(fd_tol, opts.burgers_cache);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

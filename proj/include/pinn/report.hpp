#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pinn/sampler.hpp"
#include "pinn/trainer.hpp"

namespace pinn {

/// Shortest round-trip decimal representation; locale-independent.
std::string format_double(double v);

/// Write-then-rename so partially written files are never observed.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Per-seed training curve. Column set is fixed; `with_wall` controls the
/// measured wall-clock column (the only non-reproducible field).
std::string curve_csv(const RunReport& report, bool with_wall = true);

/// Aggregate statistics, one column per method, six statistic rows.
std::string aggregate_csv(std::span<const std::string> method_names,
                          std::span<const AggregateReport> aggregates);

/// Absolute error and predicted variance over the evaluation grid.
std::string error_field_csv(const TestGrid& grid, std::span<const double> mu,
                            std::span<const double> sigma2);

/// Matrix-shaped grid study (two axes).
std::string matrix_csv(const std::string& corner, std::span<const std::string> col_labels,
                       std::span<const std::string> row_labels,
                       const std::vector<std::vector<double>>& cells);

/// Two-column grid study (one axis).
std::string pairs_csv(const std::string& axis_label, const std::string& value_label,
                      std::span<const std::pair<std::string, double>> rows);

}  // namespace pinn

#include "pinn/report.hpp"

#include <charconv>
#include <fstream>

namespace pinn {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw GraphError("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw GraphError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string curve_csv(const RunReport& report, bool with_wall) {
  std::string out = "iteration,L_r,L_b,L_0,Lp_r,Lp_b,Lp_0,mse,l2";
  if (with_wall) out += ",wall_ms";
  out += "\n";
  for (const auto& r : report.curve) {
    out += std::to_string(r.iteration);
    for (double v : {r.l_r, r.l_b, r.l_0, r.lp_r, r.lp_b, r.lp_0, r.mse, r.l2}) {
      out += ',';
      out += format_double(v);
    }
    if (with_wall) {
      out += ',';
      out += format_double(r.wall_ms);
    }
    out += '\n';
  }
  return out;
}

std::string aggregate_csv(std::span<const std::string> method_names,
                          std::span<const AggregateReport> aggregates) {
  std::string out = "statistic";
  for (const auto& m : method_names) out += "," + m;
  out += "\n";
  static const char* kRows[6] = {"Mean MSE", "Mean L2-error", "Min MSE",
                                 "Min L2-error", "Max MSE", "Max L2-error"};
  for (int row = 0; row < 6; ++row) {
    out += kRows[row];
    for (const auto& a : aggregates) {
      double v = 0;
      switch (row) {
        case 0: v = a.mean_mse; break;
        case 1: v = a.mean_l2; break;
        case 2: v = a.min_mse; break;
        case 3: v = a.min_l2; break;
        case 4: v = a.max_mse; break;
        case 5: v = a.max_l2; break;
      }
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string error_field_csv(const TestGrid& grid, std::span<const double> mu,
                            std::span<const double> sigma2) {
  std::string out = "t,x,abs_err,sigma2\n";
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    out += format_double(grid.points[i].t);
    out += ',';
    out += format_double(grid.points[i].x);
    out += ',';
    out += format_double(std::abs(grid.reference[i] - mu[i]));
    out += ',';
    out += format_double(sigma2[i]);
    out += '\n';
  }
  return out;
}

std::string matrix_csv(const std::string& corner, std::span<const std::string> col_labels,
                       std::span<const std::string> row_labels,
                       const std::vector<std::vector<double>>& cells) {
  std::string out = corner;
  for (const auto& c : col_labels) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    out += row_labels[r];
    for (double v : cells[r]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string pairs_csv(const std::string& axis_label, const std::string& value_label,
                      std::span<const std::pair<std::string, double>> rows) {
  std::string out = axis_label + "," + value_label + "\n";
  for (const auto& [k, v] : rows) out += k + "," + format_double(v) + "\n";
  return out;
}

}  // namespace pinn

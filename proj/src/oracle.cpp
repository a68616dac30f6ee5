#include "pinn/oracle.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "pinn/graph.hpp"

namespace pinn {

FdReport fd_check(const std::function<double(std::span<const double>)>& loss_value,
                  std::span<const double> analytic_grad, std::span<const double> theta,
                  std::span<const int> indices, double h, double tol) {
  if (h <= 0.0) throw GraphError("finite-difference step must be positive");
  FdReport report;
  report.h = h;
  report.tol = tol;
  std::vector<double> work(theta.begin(), theta.end());
  for (int idx : indices) {
    const double saved = work[idx];
    work[idx] = saved + h;
    const double up = loss_value(work);
    work[idx] = saved - h;
    const double down = loss_value(work);
    work[idx] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw EvalError("non-finite loss during finite-difference perturbation");
    const double fd = (up - down) / (2.0 * h);
    const double a = analytic_grad[idx];
    const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-12});
    report.entries.push_back({idx, a, fd, rel});
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  report.pass = report.max_rel_error <= tol;
  return report;
}

std::vector<std::vector<double>> adam_reference(std::vector<double> theta0,
                                                const std::vector<std::vector<double>>& grads,
                                                const AdamHyper& hp) {
  const std::size_t n = theta0.size();
  std::vector<double> m(n, 0.0), v(n, 0.0);
  std::vector<std::vector<double>> trajectory;
  trajectory.reserve(grads.size());
  double b1t = 1.0, b2t = 1.0;
  for (const auto& g : grads) {
    b1t *= hp.beta1;
    b2t *= hp.beta2;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double mhat = m[i] / (1.0 - b1t);
      const double vhat = v[i] / (1.0 - b2t);
      theta0[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
    trajectory.push_back(theta0);
  }
  return trajectory;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite nodes/weights: Newton iteration on the orthonormal Hermite
// recurrence, symmetric pairs mirrored.
// ---------------------------------------------------------------------------

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 2) throw GraphError("quadrature order must be >= 2");
  constexpr double kPim4 = 0.7511255444649425;  // pi^{-1/4}
  constexpr int kMaxIter = 64;
  constexpr double kEps = 1e-14;
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    // Stroud-Secrest style initial guesses, refined by Newton.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * nodes[1];
    } else {
      z = 2.0 * z - nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
      double p1 = kPim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps) break;
    }
    nodes[i] = z;
    nodes[n - 1 - i] = -z;
    weights[i] = 2.0 / (pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

double burgers_cole_hopf(double t, double x, std::span<const double> nodes,
                         std::span<const double> weights) {
  constexpr double kPi = std::numbers::pi;
  if (t == 0.0) return -std::sin(kPi * x);
  // nu = 0.01/pi, so the Cole-Hopf potential exponent is cos(pi y)/(2 pi nu)
  // = 50 cos(pi y).
  const double nu = 0.01 / kPi;
  const double s = 2.0 * std::sqrt(nu * t);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double y = x - s * nodes[i];
    const double g = weights[i] * std::exp(-50.0 * std::cos(kPi * y));
    num -= g * std::sin(kPi * y);
    den += g;
  }
  return num / den;
}

BurgersReference burgers_reference(double tol) {
  BurgersReference ref;
  std::vector<double> z100, w100, z200, w200;
  gauss_hermite(100, z100, w100);
  gauss_hermite(ref.quad_order, z200, w200);
  ref.u.resize(static_cast<std::size_t>(ref.n_t) * ref.n_x);
  double max_diff = 0.0;
  for (int it = 0; it < ref.n_t; ++it) {
    const double t = ref.t_of(it);
    for (int ix = 0; ix < ref.n_x; ++ix) {
      const double x = ref.x_of(ix);
      const double u_hi = burgers_cole_hopf(t, x, z200, w200);
      const double u_lo = burgers_cole_hopf(t, x, z100, w100);
      max_diff = std::max(max_diff, std::abs(u_hi - u_lo));
      ref.u[static_cast<std::size_t>(it) * ref.n_x + ix] = u_hi;
    }
  }
  if (!(max_diff < tol))
    throw GraphError("quadrature self-convergence failed: order-100 vs order-200 differ by " +
                     std::to_string(max_diff));
  return ref;
}

namespace {

constexpr char kBurgersMagic[8] = {'B', 'U', 'R', 'G', 'R', 'E', 'F', '1'};

std::uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void save_burgers_reference(const std::filesystem::path& path, const BurgersReference& ref) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GraphError("cannot write reference file: " + path.string());
  out.write(kBurgersMagic, sizeof(kBurgersMagic));
  const std::int32_t dims[3] = {ref.n_t, ref.n_x, ref.quad_order};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const std::uint64_t checksum = fnv1a(ref.u.data(), ref.u.size() * sizeof(double));
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  out.write(reinterpret_cast<const char*>(ref.u.data()),
            static_cast<std::streamsize>(ref.u.size() * sizeof(double)));
  if (!out) throw GraphError("reference write failed: " + path.string());
}

BurgersReference load_burgers_reference(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open reference file: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBurgersMagic, sizeof(magic)) != 0)
    throw GraphError("bad reference header");
  std::int32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || dims[0] <= 1 || dims[1] <= 1) throw GraphError("bad reference dims");
  std::uint64_t checksum = 0;
  in.read(reinterpret_cast<char*>(&checksum), sizeof(checksum));
  BurgersReference ref;
  ref.n_t = dims[0];
  ref.n_x = dims[1];
  ref.quad_order = dims[2];
  ref.u.resize(static_cast<std::size_t>(ref.n_t) * ref.n_x);
  in.read(reinterpret_cast<char*>(ref.u.data()),
          static_cast<std::streamsize>(ref.u.size() * sizeof(double)));
  if (!in) throw GraphError("truncated reference file");
  if (fnv1a(ref.u.data(), ref.u.size() * sizeof(double)) != checksum)
    throw GraphError("reference checksum mismatch");
  return ref;
}

BurgersReference load_or_compute_burgers(const std::filesystem::path& cache_path) {
  if (std::filesystem::exists(cache_path)) {
    try {
      return load_burgers_reference(cache_path);
    } catch (const GraphError&) {
      // fall through and regenerate
    }
  }
  BurgersReference ref = burgers_reference();
  std::error_code ec;
  const auto dir = cache_path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir, ec);
  save_burgers_reference(cache_path, ref);
  return ref;
}

}  // namespace pinn

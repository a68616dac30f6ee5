#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pinn/oracle.hpp"

using namespace pinn;

namespace {
constexpr double kPi = std::numbers::pi;
const double kSqrtPi = std::sqrt(kPi);

// Computed once; the reference build is the expensive part of this suite.
const BurgersReference& shared_reference() {
  static const BurgersReference ref = burgers_reference();
  return ref;
}
}  // namespace

TEST_CASE("fd_check on a quadratic") {
  auto loss = [](std::span<const double> th) { return th[0] * th[0]; };
  const double theta[1] = {3.0};
  const double grad[1] = {6.0};
  const int idx[1] = {0};
  FdReport rep = fd_check(loss, grad, theta, idx, 1e-4, 1e-5);
  CHECK(rep.pass);
  CHECK(rep.max_rel_error < 1e-10);
  CHECK(rep.entries[0].fd == doctest::Approx(6.0).epsilon(1e-10));

  const double bad_grad[1] = {6.1};
  FdReport rep2 = fd_check(loss, bad_grad, theta, idx, 1e-4, 1e-5);
  CHECK(!rep2.pass);
  CHECK_THROWS_AS(fd_check(loss, grad, theta, idx, -1.0, 1e-5), GraphError);
}

TEST_CASE("gauss-hermite nodes and weights") {
  for (int n : {100, 200}) {
    std::vector<double> z, w;
    gauss_hermite(n, z, w);
    REQUIRE(static_cast<int>(z.size()) == n);
    double sum_w = 0.0, sum_wz2 = 0.0, sum_wcos = 0.0;
    for (int i = 0; i < n; ++i) {
      sum_w += w[i];
      sum_wz2 += w[i] * z[i] * z[i];
      sum_wcos += w[i] * std::cos(z[i]);
      if (i > 0) CHECK(z[i] < z[i - 1]);  // descending
      CHECK(w[i] > 0.0);
    }
    // moments of exp(-z^2): integral 1 -> sqrt(pi); z^2 -> sqrt(pi)/2;
    // cos(z) -> sqrt(pi) exp(-1/4)
    CHECK(sum_w == doctest::Approx(kSqrtPi).epsilon(1e-13));
    CHECK(sum_wz2 == doctest::Approx(kSqrtPi / 2.0).epsilon(1e-12));
    CHECK(sum_wcos == doctest::Approx(kSqrtPi * std::exp(-0.25)).epsilon(1e-12));
    // symmetry
    for (int i = 0; i < n / 2; ++i) {
      CHECK(z[i] == doctest::Approx(-z[n - 1 - i]).epsilon(1e-15));
      CHECK(w[i] == doctest::Approx(w[n - 1 - i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("cole-hopf solution against independently computed values") {
  std::vector<double> z, w;
  gauss_hermite(200, z, w);
  // frozen from an independent implementation (numpy hermgauss quadrature)
  struct Known {
    double t, x, u;
  };
  const Known known[] = {
      {0.25, 0.1, -0.794974359133}, {0.5, 0.25, -0.847354524451},
      {0.75, 0.5, -0.461413296859}, {1.0, 0.9, -0.075695944486},
      {0.5, -0.33, 0.772136909390}, {1.0, 0.05, -0.700027080879},
      {0.8, 0.01, -0.725158824194},
  };
  for (const auto& k : known)
    CHECK(burgers_cole_hopf(k.t, k.x, z, w) == doctest::Approx(k.u).epsilon(1e-9));
  // initial line is exact
  CHECK(burgers_cole_hopf(0.0, 0.37, z, w) == -std::sin(kPi * 0.37));
}

TEST_CASE("burgers reference grid properties") {
  const auto& ref = shared_reference();
  CHECK(ref.n_t == 100);
  CHECK(ref.n_x == 256);
  CHECK(ref.u.size() == 25600);

  double max_sym = 0.0, max_abs = 0.0, max_ic = 0.0;
  for (int it = 0; it < ref.n_t; ++it)
    for (int ix = 0; ix < ref.n_x; ++ix) {
      max_sym = std::max(max_sym, std::abs(ref.at(it, ix) + ref.at(it, ref.n_x - 1 - ix)));
      max_abs = std::max(max_abs, std::abs(ref.at(it, ix)));
    }
  for (int ix = 0; ix < ref.n_x; ++ix)
    max_ic = std::max(max_ic, std::abs(ref.at(0, ix) + std::sin(kPi * ref.x_of(ix))));
  CHECK(max_sym < 1e-6);
  CHECK(max_ic < 1e-6);
  CHECK(max_abs <= 1.0 + 1e-9);
}

TEST_CASE("burgers cache round-trip, corruption, regeneration") {
  const auto& ref = shared_reference();
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "pinn_burgers_test.bin";

  save_burgers_reference(path, ref);
  const BurgersReference back = load_burgers_reference(path);
  CHECK(back.u == ref.u);
  CHECK(back.quad_order == ref.quad_order);

  // corrupt one payload byte: checksum must catch it
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(64);
    char byte = 0;
    f.read(&byte, 1);
    byte = static_cast<char>(~byte);
    f.seekp(64);
    f.write(&byte, 1);
  }
  CHECK_THROWS_AS(load_burgers_reference(path), GraphError);

  // load_or_compute regenerates a valid cache in place
  const BurgersReference again = load_or_compute_burgers(path);
  CHECK(again.u == ref.u);
  const BurgersReference reloaded = load_burgers_reference(path);
  CHECK(reloaded.u == ref.u);
  std::filesystem::remove(path);
}

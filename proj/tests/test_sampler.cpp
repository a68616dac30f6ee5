#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinn/rng.hpp"
#include "pinn/sampler.hpp"

using namespace pinn;

TEST_CASE("poisson boundary is exactly the two endpoints") {
  const auto& p = find_problem("poisson");
  PointSet set = sample_training(p, {100, 50, 0, 0}, 3);
  REQUIRE(set.boundary.size() == 2);
  CHECK(set.boundary[0].x == p.x_lo);
  CHECK(set.boundary[1].x == p.x_hi);
  CHECK(set.collocation.size() == 100);
  CHECK(set.initial.empty());
}

TEST_CASE("counts, domains, and loci") {
  const auto& adv = find_problem("advection");
  PointSet set = sample_training(adv, {500, 100, 100, 0}, 11);
  CHECK(set.collocation.size() == 500);
  CHECK(set.boundary.size() == 100);
  CHECK(set.initial.size() == 100);
  CHECK(set.extra.empty());
  for (const auto& s : set.collocation) {
    CHECK(s.t >= 0.0);
    CHECK(s.t <= adv.t_max);
    CHECK(s.x >= adv.x_lo);
    CHECK(s.x <= adv.x_hi);
  }
  int lo = 0, hi = 0;
  for (const auto& s : set.boundary) {
    CHECK((s.x == adv.x_lo || s.x == adv.x_hi));  // bit-equal to the edge
    (s.x == adv.x_lo ? lo : hi) += 1;
  }
  CHECK(lo == 50);
  CHECK(hi == 50);
  for (const auto& s : set.initial) {
    CHECK(s.t == 0.0);
    CHECK(s.target == doctest::Approx(2.0 * std::sin(std::numbers::pi * s.x)).epsilon(1e-15));
  }

  // odd boundary count: lower edge gets the extra point
  PointSet odd = sample_training(adv, {1, 7, 0, 0}, 11);
  lo = hi = 0;
  for (const auto& s : odd.boundary) (s.x == adv.x_lo ? lo : hi) += 1;
  CHECK(lo == 4);
  CHECK(hi == 3);

  // wave velocity points use the extra budget
  const auto& wave = find_problem("wave");
  PointSet wset = sample_training(wave, {10, 4, 4, 6}, 2);
  CHECK(wset.extra.size() == 6);
  for (const auto& s : wset.extra) {
    CHECK(s.t == 0.0);
    CHECK(s.target == 0.0);
  }

  PointSet empty = sample_training(adv, {0, 0, 0, 0}, 1);
  CHECK(empty.collocation.empty());
  CHECK(empty.boundary.empty());
  CHECK(empty.initial.empty());
}

TEST_CASE("seed determinism") {
  const auto& adv = find_problem("advection");
  PointSet a = sample_training(adv, {50, 10, 10, 0}, 42);
  PointSet b = sample_training(adv, {50, 10, 10, 0}, 42);
  REQUIRE(a.collocation.size() == b.collocation.size());
  for (std::size_t i = 0; i < a.collocation.size(); ++i) {
    CHECK(a.collocation[i].t == b.collocation[i].t);
    CHECK(a.collocation[i].x == b.collocation[i].x);
  }
  PointSet c = sample_training(adv, {50, 10, 10, 0}, 43);
  CHECK(a.collocation[0].x != c.collocation[0].x);
}

TEST_CASE("uniform sampling distribution sanity") {
  Rng rng(1234);
  const double a = -2.0, b = 5.0;
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.uniform(a, b);
  const double mean = sum / n;
  const double sigma_mean = (b - a) / std::sqrt(12.0 * n);
  CHECK(std::abs(mean - (a + b) / 2.0) < 3.0 * sigma_mean);
}

TEST_CASE("test grids") {
  const auto& poisson = find_problem("poisson");
  TestGrid pg = test_grid(poisson, 5000);
  CHECK(pg.points.size() == 5000);
  CHECK(pg.points.front().x == poisson.x_lo);
  CHECK(pg.points.back().x == poisson.x_hi);

  const auto& adv = find_problem("advection");
  TestGrid ag = test_grid(adv, 5000);
  CHECK(ag.n_x == 100);
  CHECK(ag.n_t == 50);
  CHECK(ag.points.size() == 5000);
  CHECK(ag.points.front().t == 0.0);
  CHECK(ag.points.front().x == 0.0);
  CHECK(ag.reference.front() == doctest::Approx(0.0).epsilon(1e-15));  // 2 sin(0)

  const auto& burgers = find_problem("burgers");
  CHECK_THROWS_AS(test_grid(burgers, 5000), OracleOnlyError);

  // plumbing check with a miniature reference grid
  BurgersReference tiny;
  tiny.n_t = 3;
  tiny.n_x = 4;
  tiny.u.assign(12, 0.5);
  TestGrid bg = test_grid(burgers, 0, &tiny);
  CHECK(bg.points.size() == 12);
  CHECK(bg.reference == tiny.u);
  CHECK(bg.points[0].x == -1.0);
  CHECK(bg.points[3].x == 1.0);
}

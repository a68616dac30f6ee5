#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinn/checks.hpp"
#include "pinn/problems.hpp"
#include "pinn/rng.hpp"

using namespace pinn;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("catalog holds the five problems with their constants") {
  const auto& all = catalog();
  REQUIRE(all.size() == 5);
  CHECK(all[0].name == "advection");
  CHECK(all[1].name == "burgers");
  CHECK(all[2].name == "convection_diffusion");
  CHECK(all[3].name == "poisson");
  CHECK(all[4].name == "wave");

  const auto& adv = find_problem("advection");
  CHECK(adv.x_lo == 0.0);
  CHECK(adv.x_hi == 1.0);
  CHECK(adv.t_max == 0.5);

  const auto& cd = find_problem("convection_diffusion");
  CHECK(cd.x_lo == -4.0);
  CHECK(cd.x_hi == 4.0);
  CHECK(cd.t_max == 1.0);

  const auto& wave = find_problem("wave");
  CHECK(wave.t_max == 2.0);
  CHECK(wave.x_hi == 4.0);

  const auto& poisson = find_problem("poisson");
  CHECK(poisson.stationary);
  CHECK(poisson.x_hi == doctest::Approx(2.0 * std::sqrt(kPi)).epsilon(1e-15));

  CHECK_THROWS_AS(find_problem("heat"), GraphError);
}

TEST_CASE("exact solution values") {
  CHECK(exact(find_problem("advection"), 0.25, 0.25) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(exact(find_problem("convection_diffusion"), 0.0, -2.0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(exact(find_problem("wave"), 0.0, 0.0) ==
        doctest::Approx(1.0 - 1.0 / std::cosh(16.0)).epsilon(1e-12));
  CHECK(exact(find_problem("wave"), 0.0, 0.0) == doctest::Approx(0.99999977).epsilon(1e-7));

  CHECK_THROWS_AS(exact(find_problem("burgers"), 0.5, 0.0), OracleOnlyError);
  CHECK_THROWS_AS(exact(find_problem("advection"), 0.9, 0.5), GraphError);  // t > T
  CHECK_THROWS_AS(exact(find_problem("advection"), 0.2, 1.5), GraphError);  // x out
}

TEST_CASE("residuals of simple trial functions") {
  // constant net: every derivative vanishes, so the advection residual is 0
  {
    Graph g;
    std::vector<ExprNode> in{g.input("t"), g.input("x")};
    HeadOutputs heads{g.constant(2.5) + 0.0 * in[1], g.constant(1.0)};
    ExprNode r = residual(find_problem("advection"), g, heads, in);
    Bindings b;
    b.inputs = {{"t", 0.2}, {"x", 0.8}};
    CHECK(g.eval(r, b) == doctest::Approx(0.0).epsilon(1e-15));
  }
  // burgers with trial u(t,x) = x: u_t + u u_x - nu u_xx = x
  {
    Graph g;
    std::vector<ExprNode> in{g.input("t"), g.input("x")};
    HeadOutputs heads{in[1], g.constant(1.0)};
    ExprNode r = residual(find_problem("burgers"), g, heads, in);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
      Bindings b;
      const double x = rng.uniform(-1, 1);
      b.inputs = {{"t", rng.uniform(0, 1)}, {"x", x}};
      CHECK(g.eval(r, b) == doctest::Approx(x).epsilon(1e-14));
    }
  }
  // poisson residual of the exact solution stays tiny
  {
    Graph g;
    std::vector<ExprNode> in{g.input("x")};
    const auto& p = find_problem("poisson");
    HeadOutputs heads{p.exact_builder(g, in[0], in[0]), g.constant(1.0)};
    ExprNode r = residual(p, g, heads, in);
    Rng rng(2);
    for (int i = 0; i < 25; ++i) {
      Bindings b;
      b.inputs = {{"x", rng.uniform(p.x_lo, p.x_hi)}};
      CHECK(std::abs(g.eval(r, b)) < 1e-8);
    }
  }
}

TEST_CASE("condition residuals and locus checks") {
  Arch arch;
  arch.hidden = {6};

  {
    const auto& adv = find_problem("advection");
    Graph g;
    std::vector<ExprNode> in{g.input("t"), g.input("x")};
    HeadOutputs heads = build_heads(g, arch, in);
    std::vector<double> theta(arch.param_count(), 0.0);

    // u(t,1) target at t = 0.5 is 2 sin(pi/2) = 2
    ExprNode res = condition_residual(adv, adv.boundary[1], g, heads, 0.5, 1.0);
    Bindings b;
    b.inputs = {{"t", 0.5}, {"x", 1.0}};
    b.params = theta;
    CHECK(g.eval(res, b) == doctest::Approx(-2.0).epsilon(1e-15));  // zero net minus target

    CHECK_THROWS_AS(condition_residual(adv, adv.boundary[1], g, heads, 0.5, 0.99), GraphError);
    CHECK_THROWS_AS(condition_residual(adv, adv.initial[0], g, heads, 0.1, 0.5), GraphError);
  }
  {
    const auto& poisson = find_problem("poisson");
    Graph g;
    Arch arch1;
    arch1.input_dim = 1;
    arch1.hidden = {6};
    std::vector<ExprNode> in{g.input("x")};
    HeadOutputs heads = build_heads(g, arch1, in);
    std::vector<double> theta(arch1.param_count(), 0.0);
    ExprNode res =
        condition_residual(poisson, poisson.boundary[1], g, heads, 0.0, poisson.x_hi);
    Bindings b;
    b.inputs = {{"x", poisson.x_hi}};
    b.params = theta;
    CHECK(g.eval(res, b) == doctest::Approx(0.0).epsilon(1e-15));
  }
  {
    const auto& wave = find_problem("wave");
    Graph g;
    std::vector<ExprNode> in{g.input("t"), g.input("x")};
    HeadOutputs heads = build_heads(g, arch, in);
    std::vector<double> theta(arch.param_count(), 0.0);
    ExprNode res = condition_residual(wave, wave.velocity[0], g, heads, 0.0, 1.3);
    Bindings b;
    b.inputs = {{"t", 0.0}, {"x", 1.3}};
    b.params = theta;
    CHECK(g.eval(res, b) == doctest::Approx(0.0).epsilon(1e-15));  // zero net: u_t = 0
  }
}

TEST_CASE("exact solutions satisfy the operators and conditions") {
  // Analytic floors: the wave and convection-diffusion references satisfy
  // their Dirichlet/velocity conditions only approximately.
  struct Bound {
    const char* name;
    double pde, bc, ic, vel;
  };
  const Bound bounds[4] = {{"advection", 1e-6, 1e-10, 1e-10, 0.0},
                           {"convection_diffusion", 1e-6, 1e-8, 1e-10, 0.0},
                           {"poisson", 1e-6, 1e-10, 0.0, 0.0},
                           {"wave", 1e-6, 5e-4, 1e-10, 1.5e-3}};
  for (const auto& bound : bounds) {
    const auto rep = manufactured_report(find_problem(bound.name), 200, 77);
    INFO(bound.name);
    CHECK(rep.max_pde < bound.pde);
    CHECK(rep.max_bc < bound.bc);
    if (rep.has_ic) CHECK(rep.max_ic < bound.ic);
    if (rep.has_vel) CHECK(rep.max_vel < bound.vel);
  }
}

TEST_CASE("consistency identities between exact solutions and conditions") {
  Rng rng(5);
  const auto& wave = find_problem("wave");
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(wave.x_lo, wave.x_hi);
    CHECK(std::abs(wave.exact_fn(0.0, x) - wave.initial[0].target(0.0, x)) < 1e-12);
  }
  const auto& cd = find_problem("convection_diffusion");
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(cd.x_lo, cd.x_hi);
    CHECK(std::abs(cd.exact_fn(0.0, x) - cd.initial[0].target(0.0, x)) < 1e-12);
  }
  const auto& adv = find_problem("advection");
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform(0.0, adv.t_max);
    CHECK(std::abs(adv.exact_fn(t, 0.0) - adv.boundary[0].target(t, 0.0)) < 1e-12);
    CHECK(std::abs(adv.exact_fn(t, 1.0) - adv.boundary[1].target(t, 1.0)) < 1e-12);
  }
}

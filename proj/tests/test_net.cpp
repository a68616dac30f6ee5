#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pinn/net.hpp"
#include "pinn/rng.hpp"

using namespace pinn;

TEST_CASE("parameter count and xavier bounds") {
  Arch arch;  // 2 -> 30 -> 30 -> 30 -> 2
  CHECK(arch.param_count() == 2012);

  NetParams p = init_xavier(arch, 123);
  REQUIRE(static_cast<int>(p.theta.size()) == 2012);

  // layer offsets: L1 = 90 params, L2/L3 = 930 each, out = 62
  const double bound_l2 = std::sqrt(6.0 / 60.0);
  for (int i = 90; i < 90 + 900; ++i) CHECK(std::abs(p.theta[i]) <= bound_l2);
  for (int i = 90 + 900; i < 90 + 930; ++i) CHECK(p.theta[i] == 0.0);  // biases

  NetParams q = init_xavier(arch, 123);
  CHECK(p.theta == q.theta);
  NetParams r = init_xavier(arch, 124);
  CHECK(p.theta != r.theta);

  Arch bad;
  bad.hidden = {0};
  CHECK_THROWS_AS(init_xavier(bad, 1), GraphError);
}

TEST_CASE("forward heads: zero net and variance transform") {
  Arch arch;
  Graph g;
  std::vector<ExprNode> in{g.input("t"), g.input("x")};
  HeadOutputs heads = build_heads(g, arch, in);

  std::vector<double> theta(arch.param_count(), 0.0);
  Bindings b;
  b.inputs = {{"t", 0.3}, {"x", -0.7}};
  b.params = theta;
  CHECK(g.eval(heads.mu, b) == 0.0);
  CHECK(g.eval(heads.sigma2, b) == doctest::Approx(std::log(2.0) + 1e-6).epsilon(1e-15));

  // raw variance pre-activation of -100: set the raw-head output bias
  // (last parameter) with all weights zero
  theta.back() = -100.0;
  CHECK(g.eval(heads.sigma2, b) == doctest::Approx(1e-6).epsilon(1e-9));

  ExprNode mismatch[1] = {g.input("x")};
  Arch one_d;
  one_d.input_dim = 1;
  CHECK_THROWS_AS(build_heads(g, arch, mismatch), GraphError);
  CHECK_NOTHROW(build_heads(g, one_d, mismatch));
}

TEST_CASE("mean head is twice differentiable") {
  Arch arch;
  arch.input_dim = 1;
  Graph g;
  std::vector<ExprNode> in{g.input("x")};
  HeadOutputs heads = build_heads(g, arch, in);
  ExprNode mu_xx = g.d(heads.mu, "x", 2);
  NetParams p = init_xavier(arch, 5);
  Bindings b;
  b.inputs = {{"x", 0.4}};
  b.params = p.theta;
  CHECK(std::isfinite(g.eval(mu_xx, b)));
}

TEST_CASE("variance positivity over random draws") {
  Arch small;
  small.input_dim = 2;
  small.hidden = {8, 8};
  Graph g;
  std::vector<ExprNode> in{g.input("t"), g.input("x")};
  HeadOutputs heads = build_heads(g, small, in);
  Rng rng(99);
  Bindings b;
  for (int i = 0; i < 10000; ++i) {
    NetParams p = init_xavier(small, rng.next_u64());
    // xavier gives zero biases; randomize them too
    for (auto& v : p.theta) v += rng.uniform(-2.0, 2.0);
    b.inputs = {{"t", rng.uniform(0, 1)}, {"x", rng.uniform(-1, 1)}};
    b.params = p.theta;
    CHECK(g.eval(heads.sigma2, b) >= 1e-6);
  }
}

TEST_CASE("shared trunk feeds both heads") {
  Arch arch;
  arch.hidden = {10, 10};
  Graph g;
  std::vector<ExprNode> in{g.input("t"), g.input("x")};
  HeadOutputs heads = build_heads(g, arch, in);
  NetParams p = init_xavier(arch, 17);
  Bindings b;
  b.inputs = {{"t", 0.21}, {"x", 0.43}};
  b.params = p.theta;
  const double mu0 = g.eval(heads.mu, b);
  const double s0 = g.eval(heads.sigma2, b);
  auto perturbed = p.theta;
  perturbed[3] += 0.25;  // first-layer weight
  b.params = perturbed;
  CHECK(g.eval(heads.mu, b) != mu0);
  CHECK(g.eval(heads.sigma2, b) != s0);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  Arch arch;
  arch.input_dim = 1;
  arch.hidden = {7, 5};
  NetParams p = init_xavier(arch, 2024);
  const auto path = std::filesystem::temp_directory_path() / "pinn_ckpt_test.bin";
  save_checkpoint(path, p);
  NetParams q = load_checkpoint(path);
  CHECK(q.arch == p.arch);
  CHECK(q.theta == p.theta);
  std::filesystem::remove(path);
}

#include <doctest.h>

#include <cmath>
#include <limits>

#include "pinn/adam.hpp"
#include "pinn/checks.hpp"
#include "pinn/oracle.hpp"

using namespace pinn;

TEST_CASE("zero gradient leaves parameters unchanged") {
  AdamState st(3, 1e-3);
  std::vector<double> theta{1.0, -2.0, 0.5};
  const auto before = theta;
  const std::vector<double> zeros(3, 0.0);
  adam_step(st, theta, zeros);
  CHECK(theta == before);
}

TEST_CASE("first-step magnitude is about lr for any constant gradient") {
  for (double gval : {1.0, 1e-3, 1e3, -7.0}) {
    AdamState st(2, 1e-3);
    std::vector<double> theta{0.0, 0.0};
    const std::vector<double> g{gval, gval};
    adam_step(st, theta, g);
    for (double v : theta) {
      CHECK(std::abs(std::abs(v) - st.lr) <= st.lr * 1e-6);
      CHECK(std::signbit(v) != std::signbit(gval));  // moves against the gradient
    }
  }
  // hand trace: g = 1 gives delta = -lr/(1 + eps)
  AdamState st(1, 1e-3);
  std::vector<double> theta{0.25};
  const std::vector<double> g{1.0};
  adam_step(st, theta, g);
  CHECK(theta[0] == doctest::Approx(0.25 - 1e-3 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("matches the independent reference recurrence") {
  CHECK(adam_equivalence_error(5, 10, 123) < 1e-12);
  CHECK(adam_equivalence_error(17, 10, 9) < 1e-12);
}

TEST_CASE("reference recurrence basics") {
  const AdamHyper hp;
  std::vector<std::vector<double>> zero_grads(4, std::vector<double>(2, 0.0));
  const auto traj = adam_reference({1.0, 2.0}, zero_grads, hp);
  for (const auto& step : traj) {
    CHECK(step[0] == 1.0);
    CHECK(step[1] == 2.0);
  }
}

TEST_CASE("non-finite gradient aborts without touching state") {
  AdamState st(3, 1e-3);
  std::vector<double> theta{1.0, 2.0, 3.0};
  std::vector<double> g{0.1, std::numeric_limits<double>::quiet_NaN(), 0.2};
  const auto theta_before = theta;
  const auto m_before = st.m;
  try {
    adam_step(st, theta, g);
    FAIL("expected GradError");
  } catch (const GradError& e) {
    CHECK(e.param_index == 1);
  }
  CHECK(theta == theta_before);
  CHECK(st.m == m_before);
  CHECK(st.step == 0);
}

TEST_CASE("determinism of trajectories") {
  auto run = [] {
    AdamState st(4, 2e-3, 0.9, 0.999, 1e-8);
    std::vector<double> theta{0.1, 0.2, 0.3, 0.4};
    for (int i = 1; i <= 20; ++i) {
      std::vector<double> g{std::sin(0.1 * i), std::cos(0.2 * i), 0.5, -0.25 * i};
      adam_step(st, theta, g);
    }
    return theta;
  };
  CHECK(run() == run());
}

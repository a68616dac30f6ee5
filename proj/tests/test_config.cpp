#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pinn/config.hpp"

using namespace pinn;

namespace {

std::filesystem::path write_tmp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << body;
  return path;
}

const char* kValid = R"(# advection benchmark
problem = advection
method = m5
iterations = 8000
collocation_points = 500
boundary_points = 100
initial_points = 100
lambda = 1.0
seeds = 0,1,2,3,4
metric_interval = 100
test_points = 5000
out_dir = results/advection
)";

}  // namespace

TEST_CASE("valid config parses") {
  auto path = write_tmp("pinn_cfg_valid.cfg", kValid);
  ExperimentConfig cfg = parse_config_file(path);
  CHECK(cfg.base.problem == "advection");
  REQUIRE(cfg.methods.size() == 1);
  CHECK(cfg.methods[0] == Method::kM5);
  CHECK(cfg.base.iterations == 8000);
  CHECK(cfg.base.counts.collocation == 500);
  CHECK(cfg.base.counts.boundary == 100);
  CHECK(cfg.base.strategy.lambda == 1.0);
  CHECK(cfg.base.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
  CHECK(cfg.base.hidden == std::vector<int>{30, 30, 30});  // default 3x30
  CHECK(cfg.out_dir == "results/advection");
  std::filesystem::remove(path);
}

TEST_CASE("schema violations are rejected") {
  auto check_rejected = [](const std::string& body) {
    auto path = write_tmp("pinn_cfg_bad.cfg", body);
    CHECK_THROWS_AS(parse_config_file(path), ConfigError);
    std::filesystem::remove(path);
  };

  // unknown key
  check_rejected("problem = advection\nmethod = m1\ncollocation_points = 10\nbananas = 4\n");
  // lambda without m5
  check_rejected("problem = advection\nmethod = m1\ncollocation_points = 10\nlambda = 1\n");
  // c0 without m2
  check_rejected("problem = advection\nmethod = m1\ncollocation_points = 10\nc0 = 50\n");
  // beta without m4
  check_rejected("problem = advection\nmethod = m5\ncollocation_points = 10\nbeta = 0.1\n");
  // duplicate methods
  check_rejected("problem = advection\nmethods = m1,m1\ncollocation_points = 10\n");
  // both method and methods
  check_rejected(
      "problem = advection\nmethod = m1\nmethods = m1,m5\ncollocation_points = 10\n");
  // unknown problem
  check_rejected("problem = heat\nmethod = m1\ncollocation_points = 10\n");
  // unknown method
  check_rejected("problem = advection\nmethod = m9\ncollocation_points = 10\n");
  // extra points outside wave
  check_rejected(
      "problem = advection\nmethod = m1\ncollocation_points = 10\nextra_points = 5\n");
  // poisson with initial points
  check_rejected(
      "problem = poisson\nmethod = m1\ncollocation_points = 10\ninitial_points = 5\n");
  // no collocation points
  check_rejected("problem = advection\nmethod = m1\n");
  // malformed line
  check_rejected("problem advection\nmethod = m1\ncollocation_points = 10\n");
  // duplicate key
  check_rejected("problem = advection\nproblem = wave\nmethod = m1\ncollocation_points = 10\n");
}

TEST_CASE("compare-style method lists") {
  auto path = write_tmp("pinn_cfg_cmp.cfg",
                        "problem = wave\nmethods = m1,m2,m5\ncollocation_points = 64\n"
                        "boundary_points = 8\ninitial_points = 8\nextra_points = 8\n"
                        "lambda = 0.5\nc0 = 100\n");
  ExperimentConfig cfg = parse_config_file(path);
  CHECK(cfg.methods.size() == 3);
  CHECK(cfg.base.strategy.c0 == 100.0);
  CHECK(cfg.base.strategy.lambda == 0.5);
  std::filesystem::remove(path);
}

TEST_CASE("grid specs") {
  auto lambda_path = write_tmp("pinn_grid_lambda.cfg",
                               "problem = advection\nmethod = m5\ncollocation_points = 500\n"
                               "boundary_points = 100\ninitial_points = 100\n"
                               "grid = lambda\nlambda_values = 0.01,0.05,0.1,0.5,1,5,10\n");
  GridSpec spec = parse_grid_file(lambda_path);
  CHECK(spec.kind == GridSpec::Kind::kLambda);
  REQUIRE(spec.lambda_values.size() == 7);
  CHECK(spec.lambda_values.front() == 0.01);
  CHECK(spec.lambda_values.back() == 10.0);
  std::filesystem::remove(lambda_path);

  auto points_path = write_tmp("pinn_grid_points.cfg",
                               "problem = advection\nmethod = m5\ncollocation_points = 500\n"
                               "grid = points\nnu_values = 20,50,100,150\n"
                               "nf_values = 200,500,1000\n");
  GridSpec pspec = parse_grid_file(points_path);
  CHECK(pspec.kind == GridSpec::Kind::kPoints);
  CHECK(pspec.nu_values.size() == 4);
  CHECK(pspec.nf_values.size() == 3);
  std::filesystem::remove(points_path);

  // empty axis rejected
  auto bad_path = write_tmp("pinn_grid_bad.cfg",
                            "problem = advection\nmethod = m5\ncollocation_points = 500\n"
                            "grid = points\nnf_values = 200\n");
  CHECK_THROWS_AS(parse_grid_file(bad_path), ConfigError);
  std::filesystem::remove(bad_path);

  // grid studies are m5-only
  auto m1_path = write_tmp("pinn_grid_m1.cfg",
                           "problem = advection\nmethod = m1\ncollocation_points = 500\n"
                           "grid = lambda\nlambda_values = 1\n");
  CHECK_THROWS_AS(parse_grid_file(m1_path), ConfigError);
  std::filesystem::remove(m1_path);
}

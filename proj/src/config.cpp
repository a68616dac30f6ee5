#include "pinn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "pinn/problems.hpp"

namespace pinn {

namespace {

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      break;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected number, got '" + v + "'");
  return x;
}

std::map<std::string, std::string> read_kv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw ConfigError(path.string() + ": duplicate key '" + key + "'");
  }
  return kv;
}

const std::set<std::string> kExperimentKeys = {
    "problem",       "method",          "methods",      "iterations",
    "collocation_points", "boundary_points", "initial_points", "extra_points",
    "hidden_layers", "neurons",         "lr",           "beta1",
    "beta2",         "eps",             "lambda",       "c0",
    "beta",          "seeds",           "metric_interval", "test_points",
    "out_dir"};

const std::set<std::string> kGridKeys = {"grid", "nu_values", "nf_values", "layers_values",
                                         "neurons_values", "lambda_values"};

ExperimentConfig build_experiment(const std::map<std::string, std::string>& kv,
                                  const std::string& where) {
  ExperimentConfig cfg;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  const std::string* problem = get("problem");
  if (!problem) throw ConfigError(where + ": missing 'problem'");
  try {
    find_problem(*problem);
  } catch (const GraphError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  cfg.base.problem = *problem;

  const std::string* method = get("method");
  const std::string* methods = get("methods");
  if ((method == nullptr) == (methods == nullptr))
    throw ConfigError(where + ": exactly one of 'method' or 'methods' is required");
  try {
    if (method) {
      cfg.methods.push_back(method_from_string(*method));
    } else {
      for (const auto& m : split(*methods, ',')) cfg.methods.push_back(method_from_string(m));
    }
  } catch (const GraphError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (cfg.methods.empty()) throw ConfigError(where + ": empty method list");
  std::set<Method> uniq(cfg.methods.begin(), cfg.methods.end());
  if (uniq.size() != cfg.methods.size())
    throw ConfigError(where + ": duplicate method entries");

  auto has_method = [&](Method m) { return uniq.count(m) != 0; };

  if (const auto* v = get("iterations")) cfg.base.iterations = static_cast<int>(parse_int("iterations", *v));
  if (cfg.base.iterations < 1) throw ConfigError(where + ": iterations must be >= 1");

  if (const auto* v = get("collocation_points"))
    cfg.base.counts.collocation = static_cast<int>(parse_int("collocation_points", *v));
  if (const auto* v = get("boundary_points"))
    cfg.base.counts.boundary = static_cast<int>(parse_int("boundary_points", *v));
  if (const auto* v = get("initial_points"))
    cfg.base.counts.initial = static_cast<int>(parse_int("initial_points", *v));
  if (const auto* v = get("extra_points"))
    cfg.base.counts.extra = static_cast<int>(parse_int("extra_points", *v));
  if (cfg.base.counts.collocation < 1)
    throw ConfigError(where + ": collocation_points must be >= 1");
  if (cfg.base.counts.boundary < 0 || cfg.base.counts.initial < 0 || cfg.base.counts.extra < 0)
    throw ConfigError(where + ": point counts must be >= 0");
  if (cfg.base.counts.extra > 0 && cfg.base.problem != "wave")
    throw ConfigError(where + ": extra_points apply only to the wave problem");
  if (cfg.base.problem == "poisson" && cfg.base.counts.initial > 0)
    throw ConfigError(where + ": poisson has no initial condition");

  int hidden_layers = 3, neurons = 30;
  if (const auto* v = get("hidden_layers")) hidden_layers = static_cast<int>(parse_int("hidden_layers", *v));
  if (const auto* v = get("neurons")) neurons = static_cast<int>(parse_int("neurons", *v));
  if (hidden_layers < 1 || neurons < 1)
    throw ConfigError(where + ": hidden_layers and neurons must be >= 1");
  cfg.base.hidden.assign(hidden_layers, neurons);

  if (const auto* v = get("lr")) cfg.base.lr = parse_double("lr", *v);
  if (const auto* v = get("beta1")) cfg.base.beta1 = parse_double("beta1", *v);
  if (const auto* v = get("beta2")) cfg.base.beta2 = parse_double("beta2", *v);
  if (const auto* v = get("eps")) cfg.base.eps = parse_double("eps", *v);
  if (cfg.base.lr <= 0.0) throw ConfigError(where + ": lr must be positive");

  if (const auto* v = get("lambda")) {
    if (!has_method(Method::kM5))
      throw ConfigError(where + ": 'lambda' is only meaningful for method m5");
    cfg.base.strategy.lambda = parse_double("lambda", *v);
    if (cfg.base.strategy.lambda < 0.0) throw ConfigError(where + ": lambda must be >= 0");
  }
  if (const auto* v = get("c0")) {
    if (!has_method(Method::kM2))
      throw ConfigError(where + ": 'c0' is only meaningful for method m2");
    cfg.base.strategy.c0 = parse_double("c0", *v);
    if (cfg.base.strategy.c0 <= 0.0) throw ConfigError(where + ": c0 must be > 0");
  }
  if (const auto* v = get("beta")) {
    if (!has_method(Method::kM4))
      throw ConfigError(where + ": 'beta' is only meaningful for method m4");
    cfg.base.strategy.beta = parse_double("beta", *v);
  }

  if (const auto* v = get("seeds")) {
    cfg.base.seeds.clear();
    for (const auto& s : split(*v, ','))
      cfg.base.seeds.push_back(static_cast<std::uint64_t>(parse_int("seeds", s)));
    if (cfg.base.seeds.empty()) throw ConfigError(where + ": seeds must be non-empty");
  }
  if (const auto* v = get("metric_interval"))
    cfg.base.metric_interval = static_cast<int>(parse_int("metric_interval", *v));
  if (cfg.base.metric_interval < 1) throw ConfigError(where + ": metric_interval must be >= 1");
  if (const auto* v = get("test_points"))
    cfg.base.test_points = static_cast<int>(parse_int("test_points", *v));
  if (cfg.base.test_points < 2) throw ConfigError(where + ": test_points must be >= 2");
  if (const auto* v = get("out_dir")) cfg.out_dir = *v;

  cfg.base.strategy.method = cfg.methods.front();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  const auto kv = read_kv(path);
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!kExperimentKeys.count(key))
      throw ConfigError(path.string() + ": unknown key '" + key + "'");
  }
  return build_experiment(kv, path.string());
}

GridSpec parse_grid_file(const std::filesystem::path& path) {
  const auto kv = read_kv(path);
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!kExperimentKeys.count(key) && !kGridKeys.count(key))
      throw ConfigError(path.string() + ": unknown key '" + key + "'");
  }
  auto base_kv = kv;
  for (const auto& k : kGridKeys) base_kv.erase(k);

  GridSpec spec;
  spec.base = build_experiment(base_kv, path.string());
  if (spec.base.methods.size() != 1 || spec.base.methods[0] != Method::kM5)
    throw ConfigError(path.string() + ": grid studies run method m5");

  auto it = kv.find("grid");
  if (it == kv.end()) throw ConfigError(path.string() + ": missing 'grid' (points|arch|lambda)");
  const std::string& kind = it->second;

  auto ints = [&](const char* key) {
    std::vector<int> out;
    auto k = kv.find(key);
    if (k == kv.end()) return out;
    for (const auto& s : split(k->second, ','))
      out.push_back(static_cast<int>(parse_int(key, s)));
    return out;
  };

  if (kind == "points") {
    spec.kind = GridSpec::Kind::kPoints;
    spec.nu_values = ints("nu_values");
    spec.nf_values = ints("nf_values");
    if (spec.nu_values.empty() || spec.nf_values.empty())
      throw ConfigError(path.string() + ": points grid needs nu_values and nf_values");
  } else if (kind == "arch") {
    spec.kind = GridSpec::Kind::kArch;
    spec.layers_values = ints("layers_values");
    spec.neurons_values = ints("neurons_values");
    if (spec.layers_values.empty() || spec.neurons_values.empty())
      throw ConfigError(path.string() + ": arch grid needs layers_values and neurons_values");
  } else if (kind == "lambda") {
    spec.kind = GridSpec::Kind::kLambda;
    auto k = kv.find("lambda_values");
    if (k == kv.end()) throw ConfigError(path.string() + ": lambda grid needs lambda_values");
    for (const auto& s : split(k->second, ','))
      spec.lambda_values.push_back(parse_double("lambda_values", s));
    if (spec.lambda_values.empty())
      throw ConfigError(path.string() + ": lambda_values must be non-empty");
  } else {
    throw ConfigError(path.string() + ": grid must be points|arch|lambda");
  }
  return spec;
}

}  // namespace pinn

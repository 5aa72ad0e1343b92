#pragma once

// Workbench configuration: case + factor table + stage settings, loadable
// from JSON or TOML (chosen by file extension).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ptune/simulator.hpp"

namespace ptune {

struct FactorConfig {
  std::string letter;
  double low = 0.0;
  double high = 0.0;
};

struct AlphaConfig {
  double screen = 0.05;
  double anova = 0.05;
  double model = 0.05;
  double validate = 0.05;
};

// Analytic response used in place of simulations for smoke tests and
// statistical calibration runs: y = intercept + sum of coded-term
// contributions + sigma * noise(seed).
struct StubObjective {
  double intercept = 0.0;
  std::map<std::string, double> linear;        // factor letter -> coefficient
  std::map<std::string, double> interactions;  // letter pair, e.g. "DE"
  double sigma = 0.0;
};

struct PipelineConfig {
  std::string case_path;
  std::string out_dir = "out";
  uint64_t base_seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  bool verbose = false;
  AlphaConfig alpha;
  std::vector<FactorConfig> factors;
  ParamAssignment normal_values;
  SimulationConfig simulation;
  Eigen::VectorXd objective_weights;  // empty = uniform
  std::string rsm_model = "1,x1,x2,x2^2,x1^2*x2";
  std::string transform = "auto";  // "auto", "none", or a number
  int validate_n = 20;
  bool validate_paired = false;  // reuse set A's seed stream for set B
  std::optional<StubObjective> stub;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

PipelineConfig load_config_file(const std::string& path);
PipelineConfig parse_config_json(const std::string& text);
PipelineConfig parse_config_toml(const std::string& text);

}  // namespace ptune

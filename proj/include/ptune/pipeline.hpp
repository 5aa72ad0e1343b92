#pragma once

// Stage orchestration for the tuning workflow: screen -> anova -> rsm ->
// optimize -> validate, each stage consuming the previous stage's files and
// recording its outputs in the run manifest.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptune/config.hpp"
#include "ptune/doe.hpp"
#include "ptune/rsm.hpp"
#include "ptune/simulator.hpp"
#include "ptune/stats.hpp"

namespace ptune::pipeline {

// Objective evaluation behind a uniform interface; either full transient
// simulations or the configured analytic stub.
class Evaluator {
 public:
  explicit Evaluator(const PipelineConfig& cfg);

  // One objective sample at the given parameter assignment and seed.
  // slack_voltage, when non-null and simulations are in use, receives the
  // slack-bus voltage magnitude per step.
  ObjectiveSample evaluate(const ParamAssignment& params, uint64_t seed,
                           Eigen::VectorXd* slack_voltage = nullptr) const;

  const PowerSystemCase& system() const { return sys_; }
  const std::vector<doe::Factor>& factors() const { return factors_; }
  bool simulated() const { return !cfg_.stub.has_value(); }
  int time_points() const;

  // Full parameter assignment: normal values overridden at the given factors.
  ParamAssignment assignment(const Eigen::VectorXd& physical_row,
                             const std::vector<doe::Factor>& factors) const;

 private:
  PipelineConfig cfg_;
  PowerSystemCase sys_;
  std::vector<doe::Factor> factors_;
  std::shared_ptr<const EquilibriumState> eq_;  // null for stub runs
};

void parallel_for(int n, int threads, const std::function<void(int)>& body);

// Stage entry points. Each writes its artifacts under cfg.out_dir/<stage>/
// and returns the file list (relative to out_dir) it produced.
std::vector<std::string> run_screen_stage(const PipelineConfig& cfg);
std::vector<std::string> run_anova_stage(const PipelineConfig& cfg,
                                         const std::vector<std::string>& selected_override = {});
std::vector<std::string> run_rsm_stage(const PipelineConfig& cfg,
                                       const std::vector<std::string>& factor_override = {});
std::vector<std::string> run_optimize_stage(const PipelineConfig& cfg,
                                            const std::string& model_file = "",
                                            const std::optional<rsm::BoxBounds>& bounds = {});
std::vector<std::string> run_validate_stage(const PipelineConfig& cfg,
                                            const std::string& params_a_file = "",
                                            const std::string& params_b_file = "");

// Runs all stages with manifest bookkeeping; a rerun with an unchanged
// config resumes after the last stage whose artifacts still verify.
void run_pipeline(const PipelineConfig& cfg);

// Manifest bookkeeping for a standalone stage run (the pipeline does this
// itself); records seeds, artifact digests and timestamps under out_dir.
void record_stage(const PipelineConfig& cfg, const std::string& stage,
                  const std::vector<std::string>& files);

// Standalone trace run: writes <out>.csv and <out>.json.
void simulate_to_files(const PipelineConfig& cfg, const ParamAssignment& params, uint64_t seed,
                       const std::string& out_base);

// Parameter files (JSON object of name -> value).
ParamAssignment load_params_file(const std::string& path);
void write_params_file(const std::string& path, const ParamAssignment& params);

std::string canonical_config_digest(const PipelineConfig& cfg);

}  // namespace ptune::pipeline

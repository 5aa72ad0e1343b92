// Command-line front end: simulate | screen | anova | rsm | optimize |
// validate | pipeline. Exit codes: 0 success, 1 usage or configuration
// error, 2 numerical failure.

#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptune/dae.hpp"
#include "ptune/pipeline.hpp"
#include "ptune/powerflow.hpp"
#include "ptune/report.hpp"

using namespace ptune;

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

rsm::BoxBounds parse_bounds(const std::string& s) {
  rsm::BoxBounds b;
  const auto parts = split_commas(s);
  b.lo.resize(static_cast<long>(parts.size()));
  b.hi.resize(static_cast<long>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) {
    const auto colon = parts[i].find(':');
    if (colon == std::string::npos)
      throw ConfigError("bounds must be lo:hi pairs, got '" + parts[i] + "'");
    b.lo(static_cast<long>(i)) = std::stod(parts[i].substr(0, colon));
    b.hi(static_cast<long>(i)) = std::stod(parts[i].substr(colon + 1));
    if (!(b.lo(static_cast<long>(i)) < b.hi(static_cast<long>(i))))
      throw ConfigError("bounds require lo < hi in '" + parts[i] + "'");
  }
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generator controller tuning workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, case_path, params_path, out_base;
  std::string selected, transform, factors_opt, model_file, bounds_opt, params_a, params_b;
  uint64_t seed = 0;
  int threads = -1;
  int n_replicates = -1;
  double alpha = -1.0;
  bool verbose = false;

  app.add_option("--config", config_path, "Pipeline configuration file (.json or .toml)");
  app.add_option("--out-dir", out_dir, "Output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "Base seed (overrides the config)");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_flag("--verbose", verbose, "Chatty progress output");

  auto* c_sim = app.add_subcommand("simulate", "Run one stochastic transient simulation");
  c_sim->add_option("--case", case_path, "Case file (overrides the config)");
  c_sim->add_option("--params", params_path, "Parameter assignment JSON");
  c_sim->add_option("--out", out_base, "Output base path (writes <out>.csv and <out>.json)")
      ->required();

  auto* c_screen = app.add_subcommand("screen", "Two-level factorial screening");
  auto* c_anova = app.add_subcommand("anova", "Assumption checks and pooled-error anova");
  auto* sel_opt = c_anova->add_option("--selected", selected,
                                      "Comma-separated effect labels (default: flagged)");
  c_anova->add_option("--transform", transform, "none | auto | <exponent>");
  c_anova->add_option("--alpha", alpha, "Significance level");

  auto* c_rsm = app.add_subcommand("rsm", "Three-level design and surface fit");
  std::string model_string;
  c_rsm->add_option("--model", model_string, "Model term string, e.g. 1,x1,x2,x2^2,x1^2*x2");
  c_rsm->add_option("--factors", factors_opt, "Comma-separated factor letters (default: flagged)");

  auto* c_opt = app.add_subcommand("optimize", "Minimize the fitted surface over the box");
  c_opt->add_option("--model-file", model_file, "Fitted model JSON (default: <out>/rsm/model.json)");
  c_opt->add_option("--bounds", bounds_opt, "Per-variable lo:hi pairs, comma separated");

  auto* c_val = app.add_subcommand("validate", "Replicate comparison of two parameter sets");
  c_val->add_option("--params-a", params_a, "Parameter set A (default: optimized)");
  c_val->add_option("--params-b", params_b, "Parameter set B (default: normal)");
  c_val->add_option("-n,--replicates", n_replicates, "Replicates per set");
  c_val->add_option("--alpha", alpha, "Significance level");
  bool paired = false;
  c_val->add_flag("--paired", paired, "Use the same seed stream for both sets");

  auto* c_pipe = app.add_subcommand("pipeline", "Run every stage end to end");
  (void)c_pipe;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    PipelineConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config_file(config_path);
    } else if (c_sim->parsed() && !case_path.empty()) {
      cfg.case_path = case_path;
      cfg.factors.push_back({"A", 0.0, 1.0});  // placeholder, unused by simulate
    } else {
      std::fprintf(stderr, "error: --config is required\n");
      return 1;
    }
    if (!case_path.empty()) cfg.case_path = case_path;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_opt->count() > 0) cfg.base_seed = seed;
    if (threads >= 0) cfg.threads = threads;
    if (verbose) cfg.verbose = true;
    if (!transform.empty()) cfg.transform = transform;
    if (n_replicates > 0) cfg.validate_n = n_replicates;
    if (paired) cfg.validate_paired = true;
    if (alpha > 0.0) {
      cfg.alpha.anova = alpha;
      cfg.alpha.validate = alpha;
    }

    if (c_sim->parsed()) {
      ParamAssignment params;
      if (!params_path.empty()) params = pipeline::load_params_file(params_path);
      pipeline::simulate_to_files(cfg, params, seed_opt->count() ? seed : cfg.base_seed, out_base);
      std::printf("wrote %s.csv and %s.json\n", out_base.c_str(), out_base.c_str());
    } else if (c_screen->parsed()) {
      const auto files = pipeline::run_screen_stage(cfg);
      pipeline::record_stage(cfg, "screen", files);
      std::printf("screen: %zu artifacts under %s\n", files.size(), cfg.out_dir.c_str());
      std::printf("%s", report::read_text_file(cfg.out_dir + "/screen/screening.json").c_str());
    } else if (c_anova->parsed()) {
      if (sel_opt->count() > 0 && split_commas(selected).empty()) {
        std::fprintf(stderr, "error: --selected must not be empty\n");
        return 1;
      }
      pipeline::record_stage(cfg, "anova", pipeline::run_anova_stage(cfg, split_commas(selected)));
      std::printf("%s", report::read_text_file(cfg.out_dir + "/anova/anova.txt").c_str());
      std::printf("%s", report::read_text_file(cfg.out_dir + "/anova/assumptions.json").c_str());
    } else if (c_rsm->parsed()) {
      if (!model_string.empty()) cfg.rsm_model = model_string;
      pipeline::record_stage(cfg, "rsm", pipeline::run_rsm_stage(cfg, split_commas(factors_opt)));
      std::printf("%s", report::read_text_file(cfg.out_dir + "/rsm/model_anova.txt").c_str());
      std::printf("%s", report::read_text_file(cfg.out_dir + "/rsm/coefficients.txt").c_str());
    } else if (c_opt->parsed()) {
      std::optional<rsm::BoxBounds> bounds;
      if (!bounds_opt.empty()) bounds = parse_bounds(bounds_opt);
      pipeline::record_stage(cfg, "optimize", pipeline::run_optimize_stage(cfg, model_file, bounds));
      std::printf("%s", report::read_text_file(cfg.out_dir + "/optimize/optimum.json").c_str());
    } else if (c_val->parsed()) {
      pipeline::record_stage(cfg, "validate", pipeline::run_validate_stage(cfg, params_a, params_b));
      std::printf("%s", report::read_text_file(cfg.out_dir + "/validate/ttest.txt").c_str());
    } else {
      pipeline::run_pipeline(cfg);
      std::printf("pipeline complete; artifacts under %s\n", cfg.out_dir.c_str());
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const CaseError& e) {
    std::fprintf(stderr, "case error: %s\n", e.what());
    return 1;
  } catch (const SimulationError& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return 2;
  } catch (const NewtonFailure& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 2;
  } catch (const PowerFlowError& e) {
    std::fprintf(stderr, "power flow error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

// Acceptance suite: every criterion prints one PASS/FAIL line and the
// process exits nonzero if any testable criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptune/config.hpp"
#include "ptune/dist.hpp"
#include "ptune/pipeline.hpp"
#include "ptune/powerflow.hpp"
#include "ptune/report.hpp"
#include "ptune/rng.hpp"
#include "ptune/rsm.hpp"
#include "ptune/simulator.hpp"
#include "ptune/stats.hpp"

using namespace ptune;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report_line(const std::string& id, bool pass, const std::string& detail) {
  std::printf("%-4s %s  %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

rsm::ModelSpec benchmark_spec() {
  return rsm::parse_model_spec("1,x1,x2,x2^2,x1^2*x2", {"K_A2", "K_A1"});
}

Eigen::VectorXd benchmark_coefficients() {
  Eigen::VectorXd b(5);
  b << 0.0518, -4.5868e-5, -1.4479e-4, 1.6678e-7, 1.8613e-10;
  return b;
}

// C1: box minimum of the benchmark surface, grid cross-checked, under 1 s.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const rsm::ModelSpec spec = benchmark_spec();
  const Eigen::VectorXd beta = benchmark_coefficients();
  rsm::BoxBounds bounds;
  bounds.lo = Eigen::Vector2d(25, 25);
  bounds.hi = Eigen::Vector2d(500, 500);
  const rsm::Optimum opt = rsm::minimize_over_box(spec, beta, bounds);
  const double dt = elapsed_s(t0);

  double grid_min = 1e300;
  for (int i = 0; i < 201; ++i)
    for (int j = 0; j < 201; ++j) {
      const Eigen::Vector2d p(25.0 + 475.0 * i / 200.0, 25.0 + 475.0 * j / 200.0);
      grid_min = std::min(grid_min, rsm::evaluate_surface(spec, beta, p));
    }

  const bool pass = std::fabs(opt.point(0) - 330.10) <= 0.5 &&
                    std::fabs(opt.point(1) - 373.26) <= 0.5 &&
                    std::fabs(opt.value - 0.01342) <= 1e-4 &&
                    opt.value <= grid_min + 1e-12 && dt < 1.0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "benchmark surface argmin (%.2f, %.2f) value %.6f grid_min %.6f in %.2fs",
                opt.point(0), opt.point(1), opt.value, grid_min, dt);
  report_line("C1", pass, buf);
}

// C2: stationarity and curvature at the benchmark minimizer.
void criterion_2() {
  const rsm::ModelSpec spec = benchmark_spec();
  const Eigen::VectorXd beta = benchmark_coefficients();
  const Eigen::Vector2d point(330.10, 373.26);
  const Eigen::VectorXd g = rsm::surface_gradient(spec, beta, point);
  const Eigen::MatrixXd h = rsm::surface_hessian(spec, beta, point);
  const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  const bool pass = std::fabs(g(0)) <= 1e-8 && std::fabs(g(1)) <= 1e-8 && h(0, 0) > 0 && det > 0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "gradient (%.2e, %.2e), hessian diag %.3e det %.3e",
                g(0), g(1), h(0, 0), det);
  report_line("C2", pass, buf);
}

// C3: internal consistency of the benchmark anova and interval tables.
void criterion_3() {
  bool pass = true;
  std::string detail;

  const auto screening = stats::AnovaTable::from_components(
      {{"D", 16847.5}, {"E", 277651.0}, {"F", 20878.6}, {"DE", 5749.52}},
      {1, 1, 1, 1}, 94720.9, 123.0, 0.05);
  const double expected_f[4] = {21.88, 360.54, 27.11, 7.47};
  for (int i = 0; i < 4; ++i)
    if (std::fabs(screening.rows[i].f - expected_f[i]) > 0.01) pass = false;
  char b1[90];
  std::snprintf(b1, sizeof b1, "screening F = (%.2f, %.2f, %.2f, %.2f)", screening.rows[0].f,
                screening.rows[1].f, screening.rows[2].f, screening.rows[3].f);
  detail += b1;

  // Benchmark model table with mean squares 7.0e-4 and 9.26e-5 on (4, 22) dof.
  const auto model = stats::AnovaTable::from_components({{"Model", 4.0 * 7.0e-4}}, {4.0},
                                                        22.0 * 9.26e-5, 22.0, 0.05);
  if (std::fabs(model.rows[0].f - 7.56) > 0.01) pass = false;
  char b2[60];
  std::snprintf(b2, sizeof b2, "; model F = %.4f", model.rows[0].f);
  detail += b2;

  // Interval half-width of the constant term: t(0.975, 22) * (beta / t0).
  const double hw = dist::t_quantile(0.975, 22.0) * (0.051822 / 9.39);
  if (std::fabs(hw - (0.063258 - 0.051822)) > 1e-4) pass = false;
  char b3[70];
  std::snprintf(b3, sizeof b3, "; CI half-width %.6f vs %.6f", hw, 0.063258 - 0.051822);
  detail += b3;

  report_line("C3", pass, detail);
}

// C4 is a scope statement: exact benchmark sums of squares and t0 depend
// on random samples that are not reproducible; C5-C9 substitute for it.
void criterion_4() {
  std::printf("C4   SKIP  exact benchmark sample values are out of scope by design; "
              "substituted by C5-C9\n");
}

// C5: zero-noise equilibrium hold over the full horizon, under 2 s/run.
void criterion_5(const PowerSystemCase& sys, const EquilibriumState& eq) {
  SimulationConfig cfg;
  cfg.load.lambda = 0.0;
  cfg.load.m_bound = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  const SimulationTrace tr = run_simulation(sys, eq, {}, cfg);
  const double dt = elapsed_s(t0);
  double dev = 0.0;
  for (int k = 0; k < tr.x.rows(); ++k) {
    dev = std::max(dev, (tr.x.row(k) - tr.x.row(0)).lpNorm<Eigen::Infinity>());
    dev = std::max(dev, (tr.y.row(k) - tr.y.row(0)).lpNorm<Eigen::Infinity>());
  }
  const bool pass = (tr.time.size() == 151) && dev <= 1e-6 && dt < 2.0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "max state drift %.2e over 30 s, %.2f s/run", dev, dt);
  report_line("C5", pass, buf);
}

// C6: steady-state droop response of an isolated generator.
void criterion_6() {
  const std::string text = R"({
    "base_mva": 100, "omega_s": 376.99111843077515,
    "buses": [{"id": 1, "kind": "slack", "v_setpoint": 1.0, "p_load0": 0.5, "q_load0": 0.1,
               "p_gen": 0.5}],
    "branches": [],
    "machines": [{
      "bus": 1, "role": "generator", "h": 3.0, "d": 0.0,
      "xd": 1.0, "xq": 0.8, "xd_p": 0.25, "xq_p": 0.25, "td0_p": 6.0, "tq0_p": 1.0,
      "avr": {"k_a": 50, "t_a": 0.05, "k_e": 1, "t_e": 0.5, "k_f": 0.06, "t_f": 1.0,
              "vr_min": -5, "vr_max": 5},
      "gov": {"r_droop": 0.05, "t_sv": 0.1, "t_ch": 0.3, "psv_min": 0, "psv_max": 3}
    }]})";
  const PowerSystemCase sys = parse_case(text);
  const EquilibriumState eq = initialize_equilibrium(sys, solve_power_flow(sys, 1e-12, 30));
  SimulationConfig cfg;
  cfg.load.lambda = 0.0;
  cfg.load.m_bound = 0.0;
  cfg.t_end = 30.0;
  cfg.h = 0.05;
  const int n = cfg.n_steps();
  LoadMultiplierTable table;
  table.load_bus_index = sys.load_bus_indices();
  table.mult.resize(n + 1, 1);
  for (int k = 0; k <= n; ++k) table.mult(k, 0) = (k * cfg.h < 1.0) ? 1.0 : 1.2;
  const SimulationTrace tr = integrate_with_loads(sys, eq, table, cfg);
  const double d_omega = tr.omega(n, 0) - 1.0;
  const double expected = -sys.machines[0].gov->r_droop * (0.2 * 0.5);
  const double rel = std::fabs(d_omega - expected) / std::fabs(expected);
  const bool pass = rel <= 0.01;
  char buf[140];
  std::snprintf(buf, sizeof buf, "d_omega %.6e vs analytic %.6e (rel err %.3f%%)", d_omega,
                expected, 100.0 * rel);
  report_line("C6", pass, buf);
}

// C7: exact recovery of a planted effect set by the screening rule.
void criterion_7() {
  std::vector<doe::Factor> factors;
  const char letters[] = "ABCDEFG";
  for (int i = 0; i < 7; ++i)
    factors.push_back({std::string(1, letters[i]), "P" + std::to_string(i), -1.0, 1.0});
  const auto design = doe::full_factorial_2k(factors);
  const Eigen::VectorXd xd = design.runs.col(3), xe = design.runs.col(4), xf = design.runs.col(5);
  const std::set<std::string> target = {"D", "E", "F", "DE"};
  int exact = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const rng::CounterRng g(40000 + seed);
    Eigen::VectorXd y(128);
    for (int r = 0; r < 128; ++r)
      y(r) = 10.0 + 5.0 * xd(r) + 8.0 * xe(r) + 3.0 * xf(r) + 2.0 * xd(r) * xe(r) + g.normal(0, r);
    const auto res = doe::lenth_flag(doe::estimate_effects(design, y), 0.05);
    if (std::set<std::string>(res.flagged.begin(), res.flagged.end()) == target) ++exact;
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "exact {D,E,F,DE} recovery in %d/100 seeds", exact);
  report_line("C7", exact >= 90, buf);
}

// C8: statistics against frozen reference fixtures and exact identities.
void criterion_8() {
  bool pass = true;

  const auto lev = stats::levene({{1, 2, 3, 4}, {1, 5, 9, 13}});
  if (std::fabs(lev.statistic - 6.3529411765) > 1e-6 * 6.3529411765) pass = false;
  if (std::fabs(lev.p_value - 0.0452562653) > 1e-4) pass = false;

  const std::vector<double> sw_x = {0.11, 7.87, 4.61, 10.14, 7.95, 3.14, 0.46, 4.43, 0.21, 4.75,
                                    0.71, 1.52, 3.24, 0.93, 0.42, 4.97, 9.53, 4.55, 0.47, 6.66};
  const auto sw = stats::shapiro_wilk(sw_x);
  if (std::fabs(sw.w - 0.9004728794) > 1e-6 * 0.9004728794) pass = false;
  if (std::fabs(sw.p_value - 0.0420895754) > 1e-4) pass = false;

  const auto tt = stats::two_sample_t({1, 2, 3}, {4, 5, 6}, 0.05);
  if (std::fabs(tt.t0 + 3.674234614175) > 1e-6 * 3.674234614175) pass = false;
  if (std::fabs(tt.p_two_sided - 0.021311641129) > 1e-4) pass = false;

  double worst_identity = 0.0;
  for (double dof : {1.0, 2.0, 5.0, 10.0, 30.0, 123.0})
    for (double t = 0.2; t < 3.2; t += 0.3)
      worst_identity = std::max(worst_identity,
                                std::fabs(dist::f_cdf(t * t, 1.0, dof) -
                                          (2.0 * dist::t_cdf(t, dof) - 1.0)));
  if (worst_identity > 1e-9) pass = false;

  // additivity on a freshly produced anova table
  std::vector<doe::Factor> f2;
  for (int i = 0; i < 5; ++i)
    f2.push_back({std::string(1, "ABCDE"[i]), "P" + std::to_string(i), 0.0, 1.0});
  const auto d5 = doe::full_factorial_2k(f2);
  const rng::CounterRng g(55);
  Eigen::VectorXd y(32);
  for (int r = 0; r < 32; ++r) y(r) = 1.0 + g.normal(0, r);
  const auto t5 = stats::anova_selected(d5, y, {"A", "BC", "DE"}, 0.05);
  double ss = t5.error.ss;
  for (const auto& r : t5.rows) ss += r.ss;
  if (std::fabs(ss - t5.total.ss) > 1e-10 * t5.total.ss) pass = false;

  char buf[220];
  std::snprintf(buf, sizeof buf,
                "levene %.6f, shapiro W %.6f P %.4f, t0 %.4f, F=t^2 dev %.1e, SS additive",
                lev.statistic, sw.w, sw.p_value, tt.t0, worst_identity);
  report_line("C8", pass, buf);
}

// C9 + C10: full pipeline scale, byte-level reproducibility across thread
// counts, and the directional tuning claim on fresh replicates.
void criteria_9_10(const std::string& config_path) {
  const fs::path base = fs::temp_directory_path() / "ptune_acceptance";
  fs::remove_all(base);
  const std::string dir1 = (base / "run1").string();
  const std::string dir2 = (base / "run2").string();

  PipelineConfig c1 = load_config_file(config_path);
  c1.out_dir = dir1;
  c1.threads = 1;
  PipelineConfig c2 = load_config_file(config_path);
  c2.out_dir = dir2;
  c2.threads = 2;

  const auto t0 = std::chrono::steady_clock::now();
  pipeline::run_pipeline(c1);
  pipeline::run_pipeline(c2);
  const double dt = elapsed_s(t0);

  bool identical = true;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(dir1)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir1);
    const std::string other = (fs::path(dir2) / rel).string();
    if (rel == "manifest.json") {
      auto m1 = nlohmann::json::parse(report::read_text_file(entry.path().string()));
      auto m2 = nlohmann::json::parse(report::read_text_file(other));
      for (auto* m : {&m1, &m2})
        for (auto& [k, st] : (*m)["stages"].items()) {
          (void)k;
          st.erase("started_at");
          st.erase("finished_at");
        }
      if (m1 != m2) {
        identical = false;
        if (first_diff.empty()) first_diff = "manifest.json";
      }
      continue;
    }
    if (!fs::exists(other) ||
        report::read_text_file(entry.path().string()) != report::read_text_file(other)) {
      identical = false;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "two pipelines (threads 1 vs 2) in %.1f s total; artifacts %s%s", dt,
                identical ? "byte-identical" : "DIFFER at ", first_diff.c_str());
  report_line("C9", identical && dt < 300.0, buf);

  const auto tj = nlohmann::json::parse(report::read_text_file(dir1 + "/validate/ttest.json"));
  const double mean_a = tj.at("mean_a").get<double>();
  const double mean_b = tj.at("mean_b").get<double>();
  const bool reject = tj.at("reject_h0").get<bool>();
  const double p1 = tj.at("p_one_sided").get<double>();
  char b10[240];
  std::snprintf(b10, sizeof b10,
                "tuned mean %.6f vs normal mean %.6f, one-sided p %.3e at alpha 0.05", mean_a,
                mean_b, p1);
  report_line("C10", mean_a < mean_b && reject, b10);
  fs::remove_all(base);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();

  const std::string case_path = std::string(PTUNE_CASE_DIR) + "/ieee14.json";
  const PowerSystemCase sys = load_case_file(case_path);
  const EquilibriumState eq = initialize_equilibrium(sys, solve_power_flow(sys, 1e-10, 30));
  criterion_5(sys, eq);
  criterion_6();
  criterion_7();
  criterion_8();
  criteria_9_10(std::string(PTUNE_CONFIG_DIR) + "/ieee14.json");

  std::printf("================\n%s (%d failure%s)\n", failures == 0 ? "ALL PASS" : "FAILURES",
              failures, failures == 1 ? "" : "s");
  return failures == 0 ? 0 : 1;
}

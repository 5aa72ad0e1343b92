#include "ptune/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ptune/powerflow.hpp"
#include "ptune/report.hpp"
#include "ptune/rng.hpp"

using nlohmann::json;

namespace ptune::pipeline {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& a, const std::string& b) {
  return (fs::path(a) / b).string();
}

std::string now_iso8601() {
  const auto tp = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("csv column '" + name + "' not found");
  }
};

CsvData read_csv(const std::string& path) {
  const std::string text = report::read_text_file(path);
  CsvData out;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      out.header = cells;
      first = false;
    } else {
      out.rows.push_back(cells);
    }
  }
  return out;
}

json load_json_file(const std::string& path) {
  try {
    return json::parse(report::read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": malformed JSON: " + e.what());
  }
}

// ---------------------------------------------------------------- manifest

json load_manifest(const std::string& out_dir) {
  const std::string path = join(out_dir, "manifest.json");
  if (!fs::exists(path)) return json::object();
  try {
    return load_json_file(path);
  } catch (...) {
    return json::object();
  }
}

void save_manifest(const std::string& out_dir, const json& manifest) {
  report::write_text_file(join(out_dir, "manifest.json"), manifest.dump(2) + "\n");
}

json& manifest_prepare(json& manifest, const std::string& digest, const PipelineConfig& cfg) {
  if (!manifest.contains("config_digest") || manifest["config_digest"] != digest) {
    manifest = json::object();
    manifest["config_digest"] = digest;
    manifest["case"] = cfg.case_path;
    manifest["case_digest"] =
        fs::exists(cfg.case_path) ? report::digest_file(cfg.case_path) : "";
    manifest["base_seed"] = cfg.base_seed;
    manifest["stages"] = json::object();
  }
  return manifest;
}

json stage_seed_info(const PipelineConfig& cfg, const std::string& stage) {
  const uint64_t b = cfg.base_seed;
  const int k = static_cast<int>(cfg.factors.size());
  if (stage == "screen") return {{"first", b}, {"count", 1L << k}};
  if (stage == "rsm") return {{"first", b + 10000}, {"note", "one per three-level run"}};
  if (stage == "validate")
    return {{"set_a_first", b + 20000},
            {"set_b_first", b + (cfg.validate_paired ? 20000 : 30000)},
            {"count_per_set", cfg.validate_n}};
  return json::object();  // file-driven stages draw no samples
}

void manifest_mark_started(json& manifest, const std::string& stage) {
  manifest["stages"][stage] = {{"complete", false}, {"started_at", now_iso8601()}};
}

void manifest_mark_complete(json& manifest, const std::string& stage, const std::string& out_dir,
                            const std::vector<std::string>& files) {
  json arts = json::array();
  for (const auto& f : files)
    arts.push_back({{"path", f}, {"digest", report::digest_file(join(out_dir, f))}});
  manifest["stages"][stage]["complete"] = true;
  manifest["stages"][stage]["finished_at"] = now_iso8601();
  manifest["stages"][stage]["artifacts"] = arts;
}

bool stage_verified(const json& manifest, const std::string& stage, const std::string& out_dir) {
  if (!manifest.contains("stages") || !manifest["stages"].contains(stage)) return false;
  const auto& st = manifest["stages"][stage];
  if (!st.value("complete", false)) return false;
  if (!st.contains("artifacts")) return false;
  for (const auto& a : st["artifacts"]) {
    const std::string path = join(out_dir, a["path"].get<std::string>());
    if (!fs::exists(path)) return false;
    if (report::digest_file(path) != a["digest"].get<std::string>()) return false;
  }
  return true;
}

// ------------------------------------------------------------- file formats

json factor_json(const doe::Factor& f) {
  return {{"letter", f.letter}, {"name", f.name}, {"low", f.low}, {"high", f.high}};
}

doe::Factor factor_from_json(const json& j) {
  return {j.at("letter").get<std::string>(), j.at("name").get<std::string>(),
          j.at("low").get<double>(), j.at("high").get<double>()};
}

void write_design_csv(const std::string& path, const doe::DesignMatrix& design) {
  std::vector<std::string> header{"run_id"};
  for (const auto& f : design.factors) header.push_back(f.letter);
  for (const auto& f : design.factors) header.push_back(f.name);
  report::Csv csv(header);
  const Eigen::MatrixXd phys = design.physical();
  for (int r = 0; r < design.n_runs(); ++r) {
    std::vector<std::string> row{std::to_string(r)};
    for (int c = 0; c < design.k(); ++c) row.push_back(report::fmt(design.runs(r, c)));
    for (int c = 0; c < design.k(); ++c) row.push_back(report::fmt(phys(r, c)));
    csv.add_row(row);
  }
  csv.write(path);
}

doe::DesignMatrix read_design_csv(const std::string& path, const std::vector<doe::Factor>& factors,
                                  int levels) {
  const CsvData data = read_csv(path);
  doe::DesignMatrix d;
  d.factors = factors;
  d.levels = levels;
  d.runs.resize(static_cast<long>(data.rows.size()), static_cast<long>(factors.size()));
  std::vector<int> cols;
  for (const auto& f : factors) cols.push_back(data.col(f.letter));
  for (size_t r = 0; r < data.rows.size(); ++r)
    for (size_t c = 0; c < factors.size(); ++c)
      d.runs(static_cast<long>(r), static_cast<long>(c)) = std::stod(data.rows[r][cols[c]]);
  return d;
}

struct ResponseTable {
  std::vector<uint64_t> seeds;
  Eigen::VectorXd y;
};

void write_responses_csv(const std::string& path, const ResponseTable& t) {
  report::Csv csv({"run_id", "seed", "y"});
  for (int r = 0; r < t.y.size(); ++r)
    csv.add_row({std::to_string(r), std::to_string(t.seeds[r]), report::fmt(t.y(r))});
  csv.write(path);
}

ResponseTable read_responses_csv(const std::string& path) {
  const CsvData data = read_csv(path);
  ResponseTable t;
  const int cs = data.col("seed"), cy = data.col("y");
  t.y.resize(static_cast<long>(data.rows.size()));
  for (size_t r = 0; r < data.rows.size(); ++r) {
    t.seeds.push_back(std::stoull(data.rows[r][cs]));
    t.y(static_cast<long>(r)) = std::stod(data.rows[r][cy]);
  }
  return t;
}

std::vector<std::string> split_letters(const std::string& label) {
  std::vector<std::string> out;
  for (char c : label) out.emplace_back(1, c);
  return out;
}

// Union of single letters over flagged effect labels, in letter order.
std::vector<std::string> significant_letters(const std::vector<std::string>& flagged) {
  std::set<std::string> letters;
  for (const auto& label : flagged)
    for (const auto& l : split_letters(label)) letters.insert(l);
  return {letters.begin(), letters.end()};
}

std::string conclusion_text(bool reject) { return reject ? "H0 rejected" : "H0 not rejected"; }

std::string heat_color(double t) {
  // light yellow -> deep blue
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(250 - 210 * t);
  const int g = static_cast<int>(245 - 180 * t);
  const int b = static_cast<int>(160 + 80 * t);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

// ------------------------------------------------------------------ config

std::string canonical_config_digest(const PipelineConfig& cfg) {
  json j;
  j["case"] = cfg.case_path;
  j["case_digest"] = fs::exists(cfg.case_path) ? report::digest_file(cfg.case_path) : "";
  j["base_seed"] = cfg.base_seed;
  j["alpha"] = {{"screen", cfg.alpha.screen},
                {"anova", cfg.alpha.anova},
                {"model", cfg.alpha.model},
                {"validate", cfg.alpha.validate}};
  json jf = json::array();
  for (const auto& f : cfg.factors)
    jf.push_back({{"letter", f.letter}, {"low", f.low}, {"high", f.high}});
  j["factors"] = jf;
  j["normal_values"] = cfg.normal_values;
  j["simulation"] = {{"t_end", cfg.simulation.t_end},
                     {"h", cfg.simulation.h},
                     {"newton_tol", cfg.simulation.newton_tol},
                     {"newton_max_iter", cfg.simulation.newton_max_iter},
                     {"lambda", cfg.simulation.load.lambda},
                     {"m_bound", cfg.simulation.load.m_bound},
                     {"kind", cfg.simulation.load.kind == LoadNoiseKind::ou ? "ou" : "iid-gaussian"},
                     {"tau", cfg.simulation.load.ou_tau},
                     {"load_model", cfg.simulation.load_model == LoadModel::constant_impedance
                                        ? "constant-impedance" : "constant-power"}};
  std::vector<double> w(cfg.objective_weights.data(),
                        cfg.objective_weights.data() + cfg.objective_weights.size());
  j["objective_weights"] = w;
  j["rsm_model"] = cfg.rsm_model;
  j["transform"] = cfg.transform;
  j["validate_n"] = cfg.validate_n;
  j["validate_paired"] = cfg.validate_paired;
  if (cfg.stub) {
    j["stub"] = {{"intercept", cfg.stub->intercept},
                 {"sigma", cfg.stub->sigma},
                 {"linear", cfg.stub->linear},
                 {"interactions", cfg.stub->interactions}};
  }
  return report::digest_hex(j.dump());
}

// --------------------------------------------------------------- evaluator

Evaluator::Evaluator(const PipelineConfig& cfg) : cfg_(cfg) {
  sys_ = load_case_file(cfg.case_path);
  for (const auto& fc : cfg.factors) {
    const auto it = sys_.tunable_map.find(fc.letter);
    if (it == sys_.tunable_map.end())
      throw ConfigError("factor letter " + fc.letter + " is not in the case tunable_map");
    factors_.push_back({fc.letter, it->second, fc.low, fc.high});
  }
  if (!cfg_.stub) {
    const PowerFlowSolution pf = solve_power_flow(sys_, 1e-10, 30);
    eq_ = std::make_shared<const EquilibriumState>(initialize_equilibrium(sys_, pf));
  }
}

int Evaluator::time_points() const { return cfg_.simulation.n_steps() + 1; }

ParamAssignment Evaluator::assignment(const Eigen::VectorXd& physical_row,
                                      const std::vector<doe::Factor>& factors) const {
  ParamAssignment p = cfg_.normal_values;
  for (size_t c = 0; c < factors.size(); ++c) p[factors[c].name] = physical_row(c);
  return p;
}

ObjectiveSample Evaluator::evaluate(const ParamAssignment& params, uint64_t seed,
                                    Eigen::VectorXd* slack_voltage) const {
  if (cfg_.stub) {
    const auto& stub = *cfg_.stub;
    auto coded = [&](const std::string& letter) {
      for (const auto& f : factors_) {
        if (f.letter == letter) {
          const auto it = params.find(f.name);
          const double value = (it != params.end()) ? it->second : f.mid();
          return f.encode(value);
        }
      }
      throw ConfigError("stub references unknown factor letter " + letter);
    };
    double y = stub.intercept;
    for (const auto& [letter, c] : stub.linear) y += c * coded(letter);
    for (const auto& [letters, c] : stub.interactions) {
      double prod = 1.0;
      for (char l : letters) prod *= coded(std::string(1, l));
      y += c * prod;
    }
    if (stub.sigma > 0.0) y += stub.sigma * rng::CounterRng(seed).normal(0x57B, 0);
    ObjectiveSample s;
    s.y = y;
    s.seed = seed;
    s.params = params;
    if (slack_voltage) slack_voltage->resize(0);
    return s;
  }

  SimulationConfig sim = cfg_.simulation;
  sim.seed = seed;
  const SimulationTrace trace = run_simulation(sys_, *eq_, params, sim);
  ObjectiveSpec spec;
  spec.weights = cfg_.objective_weights;
  ObjectiveSample s = evaluate_objective(sys_, *eq_, trace, spec);
  s.params = params;
  if (slack_voltage) {
    int slack = 0;
    for (size_t i = 0; i < sys_.buses.size(); ++i)
      if (sys_.buses[i].kind == BusKind::slack) slack = static_cast<int>(i);
    *slack_voltage = trace.v_mag.col(slack);
  }
  return s;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  int nt = threads;
  if (nt <= 0) nt = static_cast<int>(std::thread::hardware_concurrency());
  nt = std::max(1, std::min(nt, n));
  if (nt == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ------------------------------------------------------------ screen stage

std::vector<std::string> run_screen_stage(const PipelineConfig& cfg) {
  const Evaluator ev(cfg);
  const auto& factors = ev.factors();
  const doe::DesignMatrix design = doe::full_factorial_2k(factors);
  const Eigen::MatrixXd phys = design.physical();
  const int n = design.n_runs();

  // One sample per design point, seeded base + run index.
  ResponseTable responses;
  responses.seeds.resize(n);
  responses.y.resize(n);
  std::vector<ObjectiveSample> samples(n);
  parallel_for(n, cfg.threads, [&](int r) {
    const uint64_t seed = cfg.base_seed + static_cast<uint64_t>(r);
    try {
      samples[r] = ev.evaluate(ev.assignment(phys.row(r), factors), seed);
    } catch (const std::exception& e) {
      throw SimulationError("screen run " + std::to_string(r) + ": " + e.what(), -1);
    }
  });
  for (int r = 0; r < n; ++r) {
    responses.seeds[r] = samples[r].seed;
    responses.y(r) = samples[r].y;
  }

  // Seeded random execution order, kept for the residual-independence check.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const rng::CounterRng rg(cfg.base_seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rg.bits(0xEC0, static_cast<uint64_t>(i)) %
                                   static_cast<uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }

  const auto effects = doe::estimate_effects(design, responses.y);
  doe::ScreeningResult screening;
  if (effects.size() >= 7) {
    screening = doe::lenth_flag(effects, cfg.alpha.screen);
  } else {
    // Too few effects for a stable pseudo standard error; emit the plot
    // data and leave the flag set empty.
    screening.alpha = cfg.alpha.screen;
    screening.effects_sorted = effects;
    doe::normal_plot_data(screening.effects_sorted, screening.quantiles);
  }

  const std::string dir = join(cfg.out_dir, "screen");
  report::ensure_directory(dir);
  write_design_csv(join(dir, "design.csv"), design);
  write_responses_csv(join(dir, "responses.csv"), responses);

  report::Csv eff_csv({"label", "effect", "ss"});
  for (const auto& e : effects)
    eff_csv.add_row({e.label, report::fmt(e.effect), report::fmt(e.ss)});
  eff_csv.write(join(dir, "effects.csv"));

  report::Csv order_csv({"position", "run_id"});
  for (int i = 0; i < n; ++i) order_csv.add_row({std::to_string(i), std::to_string(order[i])});
  order_csv.write(join(dir, "run_order.csv"));

  const std::set<std::string> flagged(screening.flagged.begin(), screening.flagged.end());
  report::Csv plot_csv({"rank", "effect", "quantile", "label", "flagged"});
  for (size_t i = 0; i < screening.effects_sorted.size(); ++i) {
    const auto& e = screening.effects_sorted[i];
    plot_csv.add_row({std::to_string(i + 1), report::fmt(e.effect),
                      report::fmt(screening.quantiles(static_cast<long>(i))), e.label,
                      flagged.count(e.label) ? "1" : "0"});
  }
  plot_csv.write(join(dir, "normal_plot.csv"));

  {
    const auto& es = screening.effects_sorted;
    Eigen::VectorXd xs(es.size()), ys(es.size());
    for (size_t i = 0; i < es.size(); ++i) {
      xs(static_cast<long>(i)) = es[i].effect;
      ys(static_cast<long>(i)) = screening.quantiles(static_cast<long>(i));
    }
    report::SvgPlot plot(xs.minCoeff(), xs.maxCoeff(), ys.minCoeff(), ys.maxCoeff(),
                         "Normal plot of the design effects", "effect", "normal quantile");
    plot.scatter(xs, ys, "#3366cc");
    for (size_t i = 0; i < es.size(); ++i) {
      if (flagged.count(es[i].label)) {
        Eigen::VectorXd one_x(1), one_y(1);
        one_x(0) = es[i].effect;
        one_y(0) = ys(static_cast<long>(i));
        plot.scatter(one_x, one_y, "#cc2222", 3.5);
        plot.label(es[i].effect, ys(static_cast<long>(i)), es[i].label, "#cc2222");
      }
    }
    plot.write(join(dir, "normal_plot.svg"));
  }

  json sj;
  sj["alpha"] = screening.alpha;
  sj["pse"] = screening.lenth_pse;
  sj["margin"] = screening.margin;
  sj["margin_individual"] = screening.margin_individual;
  sj["flagged"] = screening.flagged;
  json jf = json::array();
  for (const auto& f : factors) jf.push_back(factor_json(f));
  sj["factors"] = jf;
  report::write_text_file(join(dir, "screening.json"), sj.dump(2) + "\n");

  return {"screen/design.csv", "screen/responses.csv", "screen/effects.csv",
          "screen/run_order.csv", "screen/normal_plot.csv", "screen/normal_plot.svg",
          "screen/screening.json"};
}

// ------------------------------------------------------------- anova stage

std::vector<std::string> run_anova_stage(const PipelineConfig& cfg,
                                         const std::vector<std::string>& selected_override) {
  const std::string sdir = join(cfg.out_dir, "screen");
  const json sj = load_json_file(join(sdir, "screening.json"));
  std::vector<doe::Factor> factors;
  for (const auto& f : sj.at("factors")) factors.push_back(factor_from_json(f));

  std::vector<std::string> selected = selected_override;
  if (selected.empty())
    for (const auto& l : sj.at("flagged")) selected.push_back(l.get<std::string>());
  if (selected.empty())
    throw ConfigError("anova: no effects selected (screening flagged nothing and no override given)");

  const doe::DesignMatrix design = read_design_csv(join(sdir, "design.csv"), factors, 2);
  const ResponseTable responses = read_responses_csv(join(sdir, "responses.csv"));
  const int n = design.n_runs();
  if (responses.y.size() != n) throw ConfigError("anova: responses do not match the design");

  const CsvData order_csv = read_csv(join(sdir, "run_order.csv"));
  std::vector<int> run_order;
  const int oc = order_csv.col("run_id");
  for (const auto& row : order_csv.rows) run_order.push_back(std::stoi(row[oc]));

  // Homoscedasticity of each selected main factor, on the raw data.
  const auto letters = significant_letters(selected);
  auto groups_for = [&](const std::string& letter, const std::vector<double>& data) {
    const Eigen::VectorXd sign = doe::effect_sign_column(design, letter);
    std::vector<std::vector<double>> g(2);
    for (int r = 0; r < n; ++r) g[sign(r) > 0 ? 1 : 0].push_back(data[r]);
    return g;
  };
  const std::vector<double> raw(responses.y.data(), responses.y.data() + n);

  report::Csv levene_csv({"stage", "factor", "statistic", "p_value"});
  json assumptions;
  bool raw_homoscedastic = true;
  for (const auto& l : letters) {
    const auto res = stats::levene(groups_for(l, raw));
    levene_csv.add_row({"raw", l, report::fmt(res.statistic), report::fmt(res.p_value)});
    if (res.p_value < cfg.alpha.anova) raw_homoscedastic = false;
  }

  // Power transform: fixed exponent, automatic search, or none.
  double lambda = 1.0;
  json transform_json;
  bool transformed = false;
  const bool positive = std::all_of(raw.begin(), raw.end(), [](double v) { return v > 0.0; });
  if (cfg.transform == "none") {
    transform_json["mode"] = "none";
  } else if (cfg.transform == "auto") {
    transform_json["mode"] = "auto";
    if (!positive) {
      transform_json["note"] = "transform skipped: responses are not all positive";
    } else {
      std::vector<std::vector<int>> groupings;
      for (const auto& l : letters) {
        const Eigen::VectorXd sign = doe::effect_sign_column(design, l);
        std::vector<int> g(n);
        for (int r = 0; r < n; ++r) g[r] = sign(r) > 0 ? 1 : 0;
        groupings.push_back(std::move(g));
      }
      const stats::TransformResult tr = stats::search_lambda(raw, groupings,
                                                             stats::default_lambda_grid());
      lambda = tr.lambda;
      transformed = true;
      json trace = json::array();
      for (const auto& [lam, crit] : tr.trace)
        if (std::isfinite(crit)) trace.push_back({{"lambda", lam}, {"criterion", crit}});
      transform_json["trace"] = trace;
    }
  } else {
    try {
      size_t used = 0;
      lambda = std::stod(cfg.transform, &used);
      if (used != cfg.transform.size()) throw std::invalid_argument(cfg.transform);
    } catch (const std::exception&) {
      throw ConfigError("anova: transform must be none, auto or a number, got '" +
                        cfg.transform + "'");
    }
    if (!positive) throw ConfigError("anova: power transform requires positive responses");
    transformed = true;
    transform_json["mode"] = "fixed";
  }
  transform_json["lambda"] = lambda;

  std::vector<double> work = raw;
  if (transformed && lambda != 1.0) work = stats::power_transform(raw, lambda);

  bool post_homoscedastic = true;
  for (const auto& l : letters) {
    const auto res = stats::levene(groups_for(l, work));
    levene_csv.add_row({transformed ? "transformed" : "final", l, report::fmt(res.statistic),
                        report::fmt(res.p_value)});
    if (res.p_value < cfg.alpha.anova) post_homoscedastic = false;
  }

  Eigen::VectorXd work_v = Eigen::Map<const Eigen::VectorXd>(work.data(), n);
  const stats::AnovaTable table = stats::anova_selected(design, work_v, selected, cfg.alpha.anova);

  // Residuals of the fixed-effects model with the selected terms.
  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, work_v.mean());
  for (const auto& label : selected) {
    const Eigen::VectorXd sign = doe::effect_sign_column(design, label);
    const double effect = 2.0 * sign.dot(work_v) / n;
    fitted += (effect / 2.0) * sign;
  }
  const Eigen::VectorXd resid = work_v - fitted;
  std::vector<double> resid_v(resid.data(), resid.data() + n);

  const stats::ShapiroResult sw = stats::shapiro_wilk(resid_v);
  const stats::IndependenceResult ind = stats::independence_check(resid_v, run_order, cfg.alpha.anova);

  const std::string dir = join(cfg.out_dir, "anova");
  report::ensure_directory(dir);
  levene_csv.write(join(dir, "levene.csv"));
  report::write_text_file(join(dir, "transform.json"), transform_json.dump(2) + "\n");
  report::anova_csv(table).write(join(dir, "anova.csv"));
  report::write_text_file(join(dir, "anova.txt"), report::anova_text(table));

  report::Csv resid_csv({"run_id", "response", "fitted", "residual"});
  for (int r = 0; r < n; ++r)
    resid_csv.add_row({std::to_string(r), report::fmt(work_v(r)), report::fmt(fitted(r)),
                       report::fmt(resid(r))});
  resid_csv.write(join(dir, "residuals.csv"));

  assumptions["alpha"] = cfg.alpha.anova;
  assumptions["selected"] = selected;
  assumptions["lambda"] = lambda;
  assumptions["homoscedastic_raw"] = raw_homoscedastic;
  assumptions["homoscedastic"] = post_homoscedastic;
  assumptions["shapiro"] = {{"w", sw.w}, {"p_value", sw.p_value}, {"n", sw.n}};
  assumptions["normal"] = sw.p_value >= cfg.alpha.anova;
  assumptions["independence"] = {{"durbin_watson", ind.durbin_watson},
                                 {"dw_z", ind.dw_z},
                                 {"runs", ind.runs},
                                 {"runs_z", ind.runs_z}};
  assumptions["independent"] = ind.independent;
  assumptions["all_assumptions_hold"] = post_homoscedastic && (sw.p_value >= cfg.alpha.anova) &&
                                        ind.independent;
  report::write_text_file(join(dir, "assumptions.json"), assumptions.dump(2) + "\n");

  return {"anova/levene.csv", "anova/transform.json", "anova/anova.csv", "anova/anova.txt",
          "anova/residuals.csv", "anova/assumptions.json"};
}

// --------------------------------------------------------------- rsm stage

std::vector<std::string> run_rsm_stage(const PipelineConfig& cfg,
                                       const std::vector<std::string>& factor_override) {
  const Evaluator ev(cfg);

  std::vector<std::string> letters = factor_override;
  if (letters.empty()) {
    const json sj = load_json_file(join(cfg.out_dir, "screen/screening.json"));
    std::vector<std::string> flagged;
    for (const auto& l : sj.at("flagged")) flagged.push_back(l.get<std::string>());
    letters = significant_letters(flagged);
  }
  if (letters.empty()) throw ConfigError("rsm: no significant factors to design over");

  std::vector<doe::Factor> factors;
  for (const auto& l : letters) {
    const auto it = std::find_if(ev.factors().begin(), ev.factors().end(),
                                 [&](const doe::Factor& f) { return f.letter == l; });
    if (it == ev.factors().end()) throw ConfigError("rsm: factor " + l + " is not configured");
    factors.push_back(*it);
  }

  const doe::DesignMatrix design = doe::full_factorial_3k(factors);
  const Eigen::MatrixXd phys = design.physical();
  const int n = design.n_runs();

  ResponseTable responses;
  responses.seeds.resize(n);
  responses.y.resize(n);
  std::vector<ObjectiveSample> samples(n);
  parallel_for(n, cfg.threads, [&](int r) {
    const uint64_t seed = cfg.base_seed + 10000 + static_cast<uint64_t>(r);
    try {
      samples[r] = ev.evaluate(ev.assignment(phys.row(r), factors), seed);
    } catch (const std::exception& e) {
      throw SimulationError("design run " + std::to_string(r) + ": " + e.what(), -1);
    }
  });
  for (int r = 0; r < n; ++r) {
    responses.seeds[r] = samples[r].seed;
    responses.y(r) = samples[r].y;
  }

  std::vector<std::string> names;
  for (const auto& f : factors) names.push_back(f.name);
  std::string model_text = cfg.rsm_model;
  if (factors.size() == 1 && model_text == PipelineConfig{}.rsm_model)
    model_text = "1,x1,x1^2";
  const rsm::ModelSpec spec = rsm::parse_model_spec(model_text, names);
  const rsm::FittedSurface fit = rsm::fit_least_squares(phys, responses.y, spec, cfg.alpha.model);

  const std::string dir = join(cfg.out_dir, "rsm");
  report::ensure_directory(dir);
  write_design_csv(join(dir, "design3.csv"), design);
  write_responses_csv(join(dir, "responses3.csv"), responses);

  report::anova_csv(fit.anova).write(join(dir, "model_anova.csv"));
  report::write_text_file(join(dir, "model_anova.txt"), report::anova_text(fit.anova));

  report::Csv coef_csv({"Term", "Coefficient", "LB 95%", "UB 95%", "to", "P-Value"});
  std::vector<std::vector<std::string>> coef_rows;
  for (int t = 0; t < spec.n_terms(); ++t) {
    const auto& ti = fit.inference[t];
    const std::string label = (spec.terms[t] == std::vector<int>(names.size(), 0))
                                  ? "Constant" : spec.term_label(t);
    coef_csv.add_row({label, report::fmt(ti.coefficient), report::fmt(ti.ci_lo),
                      report::fmt(ti.ci_hi), report::fmt(ti.t0), report::fmt(ti.p_value)});
    coef_rows.push_back({label, report::fmt_short(ti.coefficient), report::fmt_short(ti.ci_lo),
                         report::fmt_short(ti.ci_hi), report::fmt_short(ti.t0),
                         report::fmt_short(ti.p_value)});
  }
  coef_csv.write(join(dir, "coefficients.csv"));
  report::write_text_file(join(dir, "coefficients.txt"),
                          report::render_table({"Term", "Coefficient", "LB 95%", "UB 95%", "to",
                                                "P-Value"}, coef_rows));

  json mj;
  json jf = json::array();
  for (const auto& f : factors) jf.push_back(factor_json(f));
  mj["factors"] = jf;
  mj["model"] = model_text;
  mj["terms"] = spec.terms;
  json labels = json::array();
  for (int t = 0; t < spec.n_terms(); ++t) labels.push_back(spec.term_label(t));
  mj["term_labels"] = labels;
  std::vector<double> coefs(fit.coefficients.data(), fit.coefficients.data() + spec.n_terms());
  mj["coefficients"] = coefs;
  json inf = json::array();
  for (int t = 0; t < spec.n_terms(); ++t) {
    const auto& ti = fit.inference[t];
    inf.push_back({{"term", spec.term_label(t)},
                   {"coefficient", ti.coefficient},
                   {"std_error", ti.std_error},
                   {"t0", ti.t0},
                   {"p_value", ti.p_value},
                   {"ci_lo", ti.ci_lo},
                   {"ci_hi", ti.ci_hi}});
  }
  mj["inference"] = inf;
  mj["r_squared"] = fit.r_squared;
  mj["n_points"] = fit.n_points;
  mj["alpha"] = fit.alpha;
  report::write_text_file(join(dir, "model.json"), mj.dump(2) + "\n");

  // Surface slice over the first two model axes, remaining factors at mid.
  std::vector<std::string> files = {"rsm/design3.csv", "rsm/responses3.csv", "rsm/model.json",
                                    "rsm/model_anova.csv", "rsm/model_anova.txt",
                                    "rsm/coefficients.csv", "rsm/coefficients.txt"};
  if (factors.size() >= 2) {
    const int gpts = 61;
    report::Csv grid_csv({factors[0].name, factors[1].name, "y"});
    report::SvgPlot heat(factors[0].low, factors[0].high, factors[1].low, factors[1].high,
                         "Fitted response surface", factors[0].name, factors[1].name);
    Eigen::MatrixXd zs(gpts, gpts);
    Eigen::VectorXd pt(static_cast<long>(factors.size()));
    for (size_t i = 2; i < factors.size(); ++i) pt(static_cast<long>(i)) = factors[i].mid();
    double zmin = 1e300, zmax = -1e300;
    for (int i = 0; i < gpts; ++i) {
      for (int j = 0; j < gpts; ++j) {
        pt(0) = factors[0].low + (factors[0].high - factors[0].low) * i / (gpts - 1.0);
        pt(1) = factors[1].low + (factors[1].high - factors[1].low) * j / (gpts - 1.0);
        const double z = rsm::evaluate_surface(spec, fit.coefficients, pt);
        zs(i, j) = z;
        zmin = std::min(zmin, z);
        zmax = std::max(zmax, z);
        grid_csv.add_row({report::fmt(pt(0)), report::fmt(pt(1)), report::fmt(z)});
      }
    }
    const double dx = (factors[0].high - factors[0].low) / (gpts - 1.0);
    const double dy = (factors[1].high - factors[1].low) / (gpts - 1.0);
    for (int i = 0; i < gpts; ++i) {
      for (int j = 0; j < gpts; ++j) {
        const double x0 = factors[0].low + dx * (i - 0.5), x1 = x0 + dx;
        const double y0 = factors[1].low + dy * (j - 0.5), y1 = y0 + dy;
        const double t = (zmax > zmin) ? (zs(i, j) - zmin) / (zmax - zmin) : 0.0;
        heat.cell(std::max(x0, factors[0].low), std::max(y0, factors[1].low),
                  std::min(x1, factors[0].high), std::min(y1, factors[1].high), heat_color(t));
      }
    }
    grid_csv.write(join(dir, "surface_grid.csv"));
    heat.write(join(dir, "surface.svg"));
    files.push_back("rsm/surface_grid.csv");
    files.push_back("rsm/surface.svg");
  }
  return files;
}

// ---------------------------------------------------------- optimize stage

std::vector<std::string> run_optimize_stage(const PipelineConfig& cfg,
                                            const std::string& model_file,
                                            const std::optional<rsm::BoxBounds>& bounds_override) {
  const std::string path = model_file.empty() ? join(cfg.out_dir, "rsm/model.json") : model_file;
  const json mj = load_json_file(path);

  std::vector<doe::Factor> factors;
  for (const auto& f : mj.at("factors")) factors.push_back(factor_from_json(f));
  rsm::ModelSpec spec;
  for (const auto& f : factors) spec.factor_names.push_back(f.name);
  for (const auto& t : mj.at("terms")) spec.terms.push_back(t.get<std::vector<int>>());
  const auto coef_v = mj.at("coefficients").get<std::vector<double>>();
  const Eigen::VectorXd coefficients = Eigen::Map<const Eigen::VectorXd>(
      coef_v.data(), static_cast<long>(coef_v.size()));

  // Only the factors the model actually uses are decision variables.
  std::vector<int> used;
  for (int f = 0; f < spec.n_factors(); ++f) {
    bool appears = false;
    for (const auto& t : spec.terms)
      if (t[f] > 0) appears = true;
    if (appears) used.push_back(f);
  }
  if (used.empty()) throw ConfigError("optimize: the model has no non-constant term");

  rsm::ModelSpec used_spec;
  for (int f : used) used_spec.factor_names.push_back(spec.factor_names[f]);
  for (const auto& t : spec.terms) {
    std::vector<int> e;
    for (int f : used) e.push_back(t[f]);
    used_spec.terms.push_back(e);
  }

  rsm::BoxBounds bounds;
  if (bounds_override) {
    bounds = *bounds_override;
    if (bounds.lo.size() != static_cast<long>(used.size()))
      throw ConfigError("optimize: bounds dimension does not match the model variables");
  } else {
    bounds.lo.resize(static_cast<long>(used.size()));
    bounds.hi.resize(static_cast<long>(used.size()));
    for (size_t i = 0; i < used.size(); ++i) {
      bounds.lo(static_cast<long>(i)) = factors[used[i]].low;
      bounds.hi(static_cast<long>(i)) = factors[used[i]].high;
    }
  }

  const rsm::Optimum opt = rsm::minimize_over_box(used_spec, coefficients, bounds);

  // Verification grid; cheap for the dimensionalities in play.
  double grid_min = std::numeric_limits<double>::infinity();
  const int gpts = 201;
  if (used.size() <= 3) {
    long total = 1;
    for (size_t i = 0; i < used.size(); ++i) total *= gpts;
    Eigen::VectorXd pt(static_cast<long>(used.size()));
    for (long s = 0; s < total; ++s) {
      long rem = s;
      for (size_t i = 0; i < used.size(); ++i) {
        const long gi = rem % gpts;
        rem /= gpts;
        pt(static_cast<long>(i)) =
            bounds.lo(static_cast<long>(i)) +
            (bounds.hi(static_cast<long>(i)) - bounds.lo(static_cast<long>(i))) * gi / (gpts - 1.0);
      }
      grid_min = std::min(grid_min, rsm::evaluate_surface(used_spec, coefficients, pt));
    }
  }

  ParamAssignment optimal = cfg.normal_values;
  json point;
  for (size_t i = 0; i < used.size(); ++i) {
    optimal[used_spec.factor_names[i]] = opt.point(static_cast<long>(i));
    point[used_spec.factor_names[i]] = opt.point(static_cast<long>(i));
  }

  const std::string dir = join(cfg.out_dir, "optimize");
  report::ensure_directory(dir);
  json oj;
  oj["point"] = point;
  oj["value"] = opt.value;
  oj["location"] = (opt.location == rsm::OptimumLocation::interior) ? "interior" : "boundary";
  oj["stationarity"] = opt.stationarity;
  if (std::isfinite(grid_min)) {
    oj["grid_check"] = {{"points_per_axis", gpts}, {"grid_min", grid_min},
                        {"optimizer_not_worse", opt.value <= grid_min + 1e-12}};
  }
  report::write_text_file(join(dir, "optimum.json"), oj.dump(2) + "\n");
  write_params_file(join(dir, "params_optimal.json"), optimal);
  write_params_file(join(dir, "params_normal.json"), cfg.normal_values);

  return {"optimize/optimum.json", "optimize/params_optimal.json", "optimize/params_normal.json"};
}

// ---------------------------------------------------------- validate stage

std::vector<std::string> run_validate_stage(const PipelineConfig& cfg,
                                            const std::string& params_a_file,
                                            const std::string& params_b_file) {
  const Evaluator ev(cfg);
  const std::string a_path =
      params_a_file.empty() ? join(cfg.out_dir, "optimize/params_optimal.json") : params_a_file;
  const std::string b_path =
      params_b_file.empty() ? join(cfg.out_dir, "optimize/params_normal.json") : params_b_file;
  const ParamAssignment params_a = load_params_file(a_path);
  const ParamAssignment params_b = load_params_file(b_path);

  const int n = cfg.validate_n;
  std::vector<ObjectiveSample> sa(n), sb(n);
  std::vector<Eigen::VectorXd> va(n), vb(n);
  parallel_for(2 * n, cfg.threads, [&](int i) {
    const bool is_a = i < n;
    const int r = is_a ? i : i - n;
    const uint64_t offset = (is_a || cfg.validate_paired) ? 20000 : 30000;
    const uint64_t seed = cfg.base_seed + offset + static_cast<uint64_t>(r);
    if (is_a) {
      sa[r] = ev.evaluate(params_a, seed, &va[r]);
    } else {
      sb[r] = ev.evaluate(params_b, seed, &vb[r]);
    }
  });

  std::vector<double> ya, yb;
  for (int r = 0; r < n; ++r) {
    ya.push_back(sa[r].y);
    yb.push_back(sb[r].y);
  }

  const stats::LeveneResult lev = stats::levene({ya, yb});
  const stats::TTestResult tt = stats::two_sample_t(ya, yb, cfg.alpha.validate);

  const std::string dir = join(cfg.out_dir, "validate");
  report::ensure_directory(dir);

  auto write_samples = [&](const std::string& path, const std::vector<ObjectiveSample>& s) {
    std::vector<std::string> header{"replicate", "seed", "y"};
    if (!s.empty() && s[0].channel_iae.size() > 0)
      for (const auto& cn : s[0].channel_names) header.push_back("IAE_" + cn);
    report::Csv csv(header);
    for (int r = 0; r < n; ++r) {
      std::vector<std::string> row{std::to_string(r), std::to_string(s[r].seed),
                                   report::fmt(s[r].y)};
      for (int c = 0; c < s[r].channel_iae.size(); ++c)
        row.push_back(report::fmt(s[r].channel_iae(c)));
      csv.add_row(row);
    }
    csv.write(path);
  };
  write_samples(join(dir, "samples_a.csv"), sa);
  write_samples(join(dir, "samples_b.csv"), sb);

  report::Csv lev_csv({"statistic", "p_value", "groups", "center"});
  lev_csv.add_row({report::fmt(lev.statistic), report::fmt(lev.p_value),
                   std::to_string(lev.groups), lev.center});
  lev_csv.write(join(dir, "levene.csv"));

  json tj;
  tj["t0"] = tt.t0;
  tj["dof"] = tt.dof;
  tj["p_one_sided"] = tt.p_one_sided;
  tj["p_two_sided"] = tt.p_two_sided;
  tj["alpha"] = tt.alpha;
  tj["reject_h0"] = tt.reject_h0;
  tj["conclusion"] = conclusion_text(tt.reject_h0);
  tj["mean_a"] = std::accumulate(ya.begin(), ya.end(), 0.0) / n;
  tj["mean_b"] = std::accumulate(yb.begin(), yb.end(), 0.0) / n;
  tj["homoscedasticity_p"] = lev.p_value;
  report::write_text_file(join(dir, "ttest.json"), tj.dump(2) + "\n");

  char t0s[32], ps[32], as[32];
  std::snprintf(t0s, sizeof t0s, "%.4f", tt.t0);
  std::snprintf(ps, sizeof ps, "%.3e", tt.p_one_sided);
  std::snprintf(as, sizeof as, "%g", tt.alpha);
  report::write_text_file(
      join(dir, "ttest.txt"),
      "Hypothesis test for the difference of means\n" +
          report::render_table({"to", "P-Value", "alpha", "Conclusion"},
                               {{t0s, ps, as, conclusion_text(tt.reject_h0)}}));

  std::vector<std::string> files = {"validate/samples_a.csv", "validate/samples_b.csv",
                                    "validate/levene.csv", "validate/ttest.json",
                                    "validate/ttest.txt"};

  if (ev.simulated()) {
    const int pts = ev.time_points();
    Eigen::VectorXd time(pts);
    for (int k = 0; k < pts; ++k) time(k) = k * cfg.simulation.h;

    std::vector<std::string> header{"t"};
    for (int r = 0; r < n; ++r) header.push_back("a_" + std::to_string(r));
    for (int r = 0; r < n; ++r) header.push_back("b_" + std::to_string(r));
    report::Csv obs_csv(header);
    for (int k = 0; k < pts; ++k) {
      std::vector<std::string> row{report::fmt(time(k))};
      for (int r = 0; r < n; ++r) row.push_back(report::fmt(va[r](k)));
      for (int r = 0; r < n; ++r) row.push_back(report::fmt(vb[r](k)));
      obs_csv.add_row(row);
    }
    obs_csv.write(join(dir, "observations.csv"));

    Eigen::VectorXd mean_a = Eigen::VectorXd::Zero(pts), mean_b = Eigen::VectorXd::Zero(pts);
    for (int r = 0; r < n; ++r) {
      mean_a += va[r];
      mean_b += vb[r];
    }
    mean_a /= n;
    mean_b /= n;
    report::Csv mean_csv({"t", "mean_a", "mean_b"});
    for (int k = 0; k < pts; ++k)
      mean_csv.add_row({report::fmt(time(k)), report::fmt(mean_a(k)), report::fmt(mean_b(k))});
    mean_csv.write(join(dir, "mean_response.csv"));

    double vmin = 1e300, vmax = -1e300;
    for (int r = 0; r < n; ++r) {
      vmin = std::min({vmin, va[r].minCoeff(), vb[r].minCoeff()});
      vmax = std::max({vmax, va[r].maxCoeff(), vb[r].maxCoeff()});
    }
    report::SvgPlot obs(0.0, time(pts - 1), vmin, vmax, "Slack-bus voltage, all replicates",
                        "t [s]", "V [p.u.]");
    for (int r = 0; r < n; ++r) obs.polyline(time, vb[r], "#bbbbbb", 0.8);
    for (int r = 0; r < n; ++r) obs.polyline(time, va[r], "#3366cc", 0.8);
    obs.write(join(dir, "observations.svg"));

    report::SvgPlot mean_plot(0.0, time(pts - 1), std::min(mean_a.minCoeff(), mean_b.minCoeff()),
                              std::max(mean_a.maxCoeff(), mean_b.maxCoeff()),
                              "Slack-bus voltage, replicate mean", "t [s]", "V [p.u.]");
    mean_plot.polyline(time, mean_b, "#888888", 1.5);
    mean_plot.polyline(time, mean_a, "#3366cc", 1.5);
    mean_plot.write(join(dir, "mean_response.svg"));

    files.insert(files.end(), {"validate/observations.csv", "validate/mean_response.csv",
                               "validate/observations.svg", "validate/mean_response.svg"});
  }
  return files;
}

// -------------------------------------------------------------- pipeline

void run_pipeline(const PipelineConfig& cfg) {
  report::ensure_directory(cfg.out_dir);
  const std::string digest = canonical_config_digest(cfg);
  json manifest = load_manifest(cfg.out_dir);
  manifest_prepare(manifest, digest, cfg);

  struct Stage {
    const char* name;
    std::function<std::vector<std::string>()> run;
  };
  const std::vector<Stage> stages = {
      {"screen", [&] { return run_screen_stage(cfg); }},
      {"anova", [&] { return run_anova_stage(cfg); }},
      {"rsm", [&] { return run_rsm_stage(cfg); }},
      {"optimize", [&] { return run_optimize_stage(cfg); }},
      {"validate", [&] { return run_validate_stage(cfg); }},
  };

  for (const auto& stage : stages) {
    if (stage_verified(manifest, stage.name, cfg.out_dir)) {
      std::printf("[%s] up to date, skipped\n", stage.name);
      continue;
    }
    std::printf("[%s] running...\n", stage.name);
    std::fflush(stdout);
    manifest_mark_started(manifest, stage.name);
    save_manifest(cfg.out_dir, manifest);
    std::vector<std::string> files;
    try {
      files = stage.run();
    } catch (...) {
      save_manifest(cfg.out_dir, manifest);  // stage left marked incomplete
      std::fprintf(stderr, "stage %s failed\n", stage.name);
      throw;
    }
    manifest["stages"][stage.name]["seeds"] = stage_seed_info(cfg, stage.name);
    manifest_mark_complete(manifest, stage.name, cfg.out_dir, files);
    save_manifest(cfg.out_dir, manifest);
    std::printf("[%s] done (%zu artifacts)\n", stage.name, files.size());
  }
}

void record_stage(const PipelineConfig& cfg, const std::string& stage,
                  const std::vector<std::string>& files) {
  report::ensure_directory(cfg.out_dir);
  json manifest = load_manifest(cfg.out_dir);
  manifest_prepare(manifest, canonical_config_digest(cfg), cfg);
  if (!manifest["stages"].contains(stage)) manifest_mark_started(manifest, stage);
  manifest["stages"][stage]["seeds"] = stage_seed_info(cfg, stage);
  manifest_mark_complete(manifest, stage, cfg.out_dir, files);
  save_manifest(cfg.out_dir, manifest);
}

// ------------------------------------------------------------- simulate

void simulate_to_files(const PipelineConfig& cfg, const ParamAssignment& params, uint64_t seed,
                       const std::string& out_base) {
  const PowerSystemCase sys = load_case_file(cfg.case_path);
  const PowerFlowSolution pf = solve_power_flow(sys, 1e-10, 30);
  const EquilibriumState eq = initialize_equilibrium(sys, pf);
  SimulationConfig sim = cfg.simulation;
  sim.seed = seed;
  const SimulationTrace trace = run_simulation(sys, eq, params, sim);

  const StateLayout layout(sys);
  std::vector<std::string> header{"t"};
  for (const auto& b : sys.buses) header.push_back("V_" + std::to_string(b.id));
  for (const auto& m : sys.machines) header.push_back("omega_" + std::to_string(m.bus));
  for (const auto& nm : layout.diff_names()) header.push_back(nm);
  for (int bi : trace.loads.load_bus_index)
    header.push_back("mult_" + std::to_string(sys.buses[bi].id));

  report::Csv csv(header);
  const int pts = static_cast<int>(trace.time.size());
  for (int k = 0; k < pts; ++k) {
    std::vector<std::string> row{report::fmt(trace.time(k))};
    for (int b = 0; b < layout.n_bus(); ++b) row.push_back(report::fmt(trace.v_mag(k, b)));
    for (int m = 0; m < layout.n_mach(); ++m) row.push_back(report::fmt(trace.omega(k, m)));
    for (int i = 0; i < layout.n_diff(); ++i) row.push_back(report::fmt(trace.x(k, i)));
    for (int c = 0; c < trace.loads.mult.cols(); ++c)
      row.push_back(report::fmt(trace.loads.mult(k, c)));
    csv.add_row(row);
  }
  csv.write(out_base + ".csv");

  json side;
  side["seed"] = seed;
  side["params"] = params;
  side["case"] = cfg.case_path;
  side["case_digest"] = report::digest_file(cfg.case_path);
  side["t_end"] = sim.t_end;
  side["h"] = sim.h;
  side["newton_tol"] = sim.newton_tol;
  side["config_digest"] = canonical_config_digest(cfg);
  report::write_text_file(out_base + ".json", side.dump(2) + "\n");
}

ParamAssignment load_params_file(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.is_object()) throw ConfigError(path + ": parameter file must be an object");
  ParamAssignment p;
  for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = it.value().get<double>();
  return p;
}

void write_params_file(const std::string& path, const ParamAssignment& params) {
  const json j(params);
  report::write_text_file(path, j.dump(2) + "\n");
}

}  // namespace ptune::pipeline

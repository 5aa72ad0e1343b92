#include "ptune/config.hpp"

#include <filesystem>
#include <set>

#include <json.hpp>

#include "ptune/report.hpp"
#include "ptune/toml_lite.hpp"

using nlohmann::json;

namespace ptune {

namespace {

PipelineConfig from_json(const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  PipelineConfig cfg;

  for (auto it = root.begin(); it != root.end(); ++it) {
    static const std::set<std::string> allowed = {
        "case", "out_dir", "base_seed", "threads", "verbose", "alpha", "factors",
        "normal_values", "simulation", "objective", "rsm_model", "transform",
        "validate_n", "validate_paired", "stub"};
    if (!allowed.count(it.key())) throw ConfigError("config: unknown field '" + it.key() + "'");
  }

  if (!root.contains("case") || !root["case"].is_string())
    throw ConfigError("config: missing case path");
  cfg.case_path = root["case"].get<std::string>();
  if (root.contains("out_dir")) cfg.out_dir = root["out_dir"].get<std::string>();
  if (root.contains("base_seed")) cfg.base_seed = root["base_seed"].get<uint64_t>();
  if (root.contains("threads")) cfg.threads = root["threads"].get<int>();
  if (root.contains("verbose")) cfg.verbose = root["verbose"].get<bool>();

  if (root.contains("alpha")) {
    const auto& a = root["alpha"];
    if (a.is_number()) {
      const double v = a.get<double>();
      cfg.alpha = {v, v, v, v};
    } else if (a.is_object()) {
      if (a.contains("screen")) cfg.alpha.screen = a["screen"].get<double>();
      if (a.contains("anova")) cfg.alpha.anova = a["anova"].get<double>();
      if (a.contains("model")) cfg.alpha.model = a["model"].get<double>();
      if (a.contains("validate")) cfg.alpha.validate = a["validate"].get<double>();
    } else {
      throw ConfigError("config: alpha must be a number or object");
    }
  }

  if (!root.contains("factors") || !root["factors"].is_array() || root["factors"].empty())
    throw ConfigError("config: factors[] required");
  std::set<std::string> letters;
  for (const auto& jf : root["factors"]) {
    FactorConfig f;
    f.letter = jf.at("letter").get<std::string>();
    f.low = jf.at("low").get<double>();
    f.high = jf.at("high").get<double>();
    if (!(f.low < f.high))
      throw ConfigError("config: factor " + f.letter + " requires low < high");
    if (!letters.insert(f.letter).second)
      throw ConfigError("config: duplicate factor letter " + f.letter);
    cfg.factors.push_back(std::move(f));
  }

  if (root.contains("normal_values")) {
    for (auto it = root["normal_values"].begin(); it != root["normal_values"].end(); ++it)
      cfg.normal_values[it.key()] = it.value().get<double>();
  }

  if (root.contains("simulation")) {
    const auto& s = root["simulation"];
    if (s.contains("t_end")) cfg.simulation.t_end = s["t_end"].get<double>();
    if (s.contains("h")) cfg.simulation.h = s["h"].get<double>();
    if (s.contains("newton_tol")) cfg.simulation.newton_tol = s["newton_tol"].get<double>();
    if (s.contains("newton_max_iter"))
      cfg.simulation.newton_max_iter = s["newton_max_iter"].get<int>();
    if (s.contains("load_model")) {
      const std::string lm = s["load_model"].get<std::string>();
      if (lm == "constant-power") cfg.simulation.load_model = LoadModel::constant_power;
      else if (lm == "constant-impedance") cfg.simulation.load_model = LoadModel::constant_impedance;
      else throw ConfigError("config: load_model must be constant-power or constant-impedance");
    }
    if (s.contains("load")) {
      const auto& l = s["load"];
      if (l.contains("lambda")) cfg.simulation.load.lambda = l["lambda"].get<double>();
      if (l.contains("m_bound")) cfg.simulation.load.m_bound = l["m_bound"].get<double>();
      if (l.contains("tau")) cfg.simulation.load.ou_tau = l["tau"].get<double>();
      if (l.contains("kind")) {
        const std::string k = l["kind"].get<std::string>();
        if (k == "iid-gaussian") cfg.simulation.load.kind = LoadNoiseKind::iid_gaussian;
        else if (k == "ou") cfg.simulation.load.kind = LoadNoiseKind::ou;
        else throw ConfigError("config: load kind must be iid-gaussian or ou");
      }
    }
  }

  if (root.contains("objective") && root["objective"].contains("weights")) {
    const auto& w = root["objective"]["weights"];
    if (w.is_string()) {
      if (w.get<std::string>() != "uniform")
        throw ConfigError("config: objective weights must be 'uniform' or an array");
    } else {
      cfg.objective_weights.resize(w.size());
      for (size_t i = 0; i < w.size(); ++i) cfg.objective_weights(i) = w[i].get<double>();
    }
  }

  if (root.contains("rsm_model")) cfg.rsm_model = root["rsm_model"].get<std::string>();
  if (root.contains("transform")) {
    const auto& t = root["transform"];
    cfg.transform = t.is_number() ? report::fmt(t.get<double>()) : t.get<std::string>();
  }
  if (root.contains("validate_n")) cfg.validate_n = root["validate_n"].get<int>();
  if (root.contains("validate_paired")) cfg.validate_paired = root["validate_paired"].get<bool>();
  if (cfg.validate_n < 2) throw ConfigError("config: validate_n must be at least 2");

  if (root.contains("stub")) {
    const auto& s = root["stub"];
    StubObjective stub;
    stub.intercept = s.value("intercept", 0.0);
    stub.sigma = s.value("sigma", 0.0);
    if (s.contains("linear"))
      for (auto it = s["linear"].begin(); it != s["linear"].end(); ++it)
        stub.linear[it.key()] = it.value().get<double>();
    if (s.contains("interactions"))
      for (auto it = s["interactions"].begin(); it != s["interactions"].end(); ++it)
        stub.interactions[it.key()] = it.value().get<double>();
    cfg.stub = std::move(stub);
  }
  return cfg;
}

}  // namespace

PipelineConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return from_json(root);
}

PipelineConfig parse_config_toml(const std::string& text) {
  try {
    return from_json(toml_lite::parse(text));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

PipelineConfig load_config_file(const std::string& path) {
  std::string text;
  try {
    text = report::read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const std::string ext = std::filesystem::path(path).extension().string();
  PipelineConfig cfg = (ext == ".toml") ? parse_config_toml(text) : parse_config_json(text);
  // Case paths are resolved relative to the config file.
  const auto dir = std::filesystem::path(path).parent_path();
  if (!cfg.case_path.empty() && std::filesystem::path(cfg.case_path).is_relative() && !dir.empty()) {
    const auto candidate = dir / cfg.case_path;
    if (std::filesystem::exists(candidate)) cfg.case_path = candidate.string();
  }
  return cfg;
}

}  // namespace ptune

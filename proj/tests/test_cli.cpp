#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "ptune/config.hpp"
#include "ptune/pipeline.hpp"
#include "ptune/report.hpp"
#include "ptune/toml_lite.hpp"

using namespace ptune;
namespace fs = std::filesystem;

namespace {

const std::string kBin = std::string(PTUNE_BIN_DIR) + "/ptune";
const std::string kSmokeJson = std::string(PTUNE_CONFIG_DIR) + "/smoke.json";
const std::string kSmokeToml = std::string(PTUNE_CONFIG_DIR) + "/smoke.toml";
const std::string kIeeeConfig = std::string(PTUNE_CONFIG_DIR) + "/ieee14.json";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ptune_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

PipelineConfig smoke_config(const std::string& out_dir) {
  PipelineConfig cfg = load_config_file(kSmokeJson);
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("toml and json configs load identically") {
  PipelineConfig a = load_config_file(kSmokeJson);
  PipelineConfig b = load_config_file(kSmokeToml);
  b.out_dir = a.out_dir;  // the only intended difference
  CHECK(pipeline::canonical_config_digest(a) == pipeline::canonical_config_digest(b));
}

TEST_CASE("toml subset parser") {
  const auto j = toml_lite::parse(R"(
# comment
title = "x"
n = 3
f = 2.5
flag = true
arr = [1, 2, 3]

[a.b]
k = "v"

[[items]]
id = 1
[[items]]
id = 2
)");
  CHECK(j["title"] == "x");
  CHECK(j["n"] == 3);
  CHECK(j["f"] == 2.5);
  CHECK(j["flag"] == true);
  CHECK(j["arr"].size() == 3);
  CHECK(j["a"]["b"]["k"] == "v");
  REQUIRE(j["items"].size() == 2);
  CHECK(j["items"][1]["id"] == 2);
  CHECK_THROWS_AS(toml_lite::parse("key"), std::invalid_argument);
  CHECK_THROWS_AS(toml_lite::parse("k = \"unterminated"), std::invalid_argument);
}

TEST_CASE("stub-backed pipeline stages chain on files") {
  TempDir tmp("stub_pipeline");
  PipelineConfig cfg = smoke_config(tmp.str());
  pipeline::run_pipeline(cfg);

  // every stage directory materialized
  for (const char* f :
       {"screen/design.csv", "screen/responses.csv", "screen/effects.csv", "screen/screening.json",
        "anova/anova.csv", "anova/assumptions.json", "rsm/model.json", "optimize/optimum.json",
        "optimize/params_optimal.json", "validate/ttest.json", "manifest.json"})
    CHECK(fs::exists(tmp.path / f));

  // stub: y = 20 + 2.5 D + 4 E + DE; both main effects must be flagged
  const auto sj = nlohmann::json::parse(report::read_text_file(tmp.str() + "/screen/screening.json"));
  std::vector<std::string> flagged = sj.at("flagged").get<std::vector<std::string>>();
  CHECK(std::find(flagged.begin(), flagged.end(), "D") != flagged.end());
  CHECK(std::find(flagged.begin(), flagged.end(), "E") != flagged.end());

  // the stub surface decreases toward low D/E, so the optimum is the low corner
  const auto oj = nlohmann::json::parse(report::read_text_file(tmp.str() + "/optimize/optimum.json"));
  CHECK(oj.at("point").at("K_A2").get<double>() == doctest::Approx(25.0));
  CHECK(oj.at("point").at("K_A1").get<double>() == doctest::Approx(25.0));

  // and validation must reject the null in favour of the optimized set
  const auto tj = nlohmann::json::parse(report::read_text_file(tmp.str() + "/validate/ttest.json"));
  CHECK(tj.at("reject_h0").get<bool>());
  CHECK(tj.at("mean_a").get<double>() < tj.at("mean_b").get<double>());
}

TEST_CASE("screening effects on the stub match the planted coefficients") {
  TempDir tmp("stub_effects");
  PipelineConfig cfg = smoke_config(tmp.str());
  cfg.stub->sigma = 0.0;  // exact responses
  pipeline::run_screen_stage(cfg);

  // effect = 2 * coefficient for a coded linear model
  const std::string text = report::read_text_file(tmp.str() + "/screen/effects.csv");
  std::map<std::string, double> effects;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    effects[line.substr(0, c1)] = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
  }
  CHECK(effects.at("D") == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(effects.at("E") == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(effects.at("DE") == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("pipeline reruns resume from the manifest") {
  TempDir tmp("resume");
  PipelineConfig cfg = smoke_config(tmp.str());
  pipeline::run_pipeline(cfg);
  const auto m1 = nlohmann::json::parse(report::read_text_file(tmp.str() + "/manifest.json"));
  for (const char* st : {"screen", "anova", "rsm", "optimize", "validate"})
    CHECK(m1.at("stages").at(st).at("complete").get<bool>());

  // mark one stage incomplete; a rerun must redo it (and only it)
  auto m2 = m1;
  m2["stages"]["optimize"]["complete"] = false;
  report::write_text_file(tmp.str() + "/manifest.json", m2.dump(2) + "\n");
  const auto t_screen_before = fs::last_write_time(tmp.path / "screen/design.csv");
  pipeline::run_pipeline(cfg);
  const auto m3 = nlohmann::json::parse(report::read_text_file(tmp.str() + "/manifest.json"));
  CHECK(m3.at("stages").at("optimize").at("complete").get<bool>());
  CHECK(fs::last_write_time(tmp.path / "screen/design.csv") == t_screen_before);

  // manifest lists every artifact with a matching digest
  std::set<std::string> listed;
  for (const auto& [name, st] : m3.at("stages").items()) {
    (void)name;
    for (const auto& a : st.at("artifacts")) {
      const std::string rel = a.at("path").get<std::string>();
      const std::string p = tmp.str() + "/" + rel;
      CHECK(fs::exists(p));
      CHECK(report::digest_file(p) == a.at("digest").get<std::string>());
      listed.insert(rel);
    }
  }
  // and conversely, every file in the output tree is listed
  for (const auto& entry : fs::recursive_directory_iterator(tmp.path)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), tmp.path).string();
    if (rel == "manifest.json") continue;
    CHECK(listed.count(rel) == 1);
  }
}

TEST_CASE("identical seeds reproduce identical artifacts") {
  TempDir t1("repro1"), t2("repro2");
  PipelineConfig c1 = smoke_config(t1.str());
  PipelineConfig c2 = smoke_config(t2.str());
  c1.threads = 1;
  c2.threads = 2;  // thread count must not matter
  pipeline::run_pipeline(c1);
  pipeline::run_pipeline(c2);
  for (const auto& entry : fs::recursive_directory_iterator(t1.path)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), t1.path);
    if (rel == "manifest.json") continue;  // timestamps differ by design
    CHECK(report::read_text_file(entry.path().string()) ==
          report::read_text_file((t2.path / rel).string()));
  }
}

TEST_CASE("a seven-factor screen emits 128 responses and 127 effects") {
  TempDir tmp("screen7");
  PipelineConfig cfg = smoke_config(tmp.str());
  cfg.factors = {{"A", 25, 500}, {"B", 25, 500}, {"C", 25, 500}, {"D", 25, 500},
                 {"E", 25, 500}, {"F", 0.02, 0.1}, {"G", 0.02, 0.1}};
  pipeline::run_screen_stage(cfg);
  const std::string responses = report::read_text_file(tmp.str() + "/screen/responses.csv");
  const std::string effects = report::read_text_file(tmp.str() + "/screen/effects.csv");
  CHECK(std::count(responses.begin(), responses.end(), '\n') == 129);  // header + 128
  CHECK(std::count(effects.begin(), effects.end(), '\n') == 128);      // header + 127
}

TEST_CASE("paired validation of identical parameter sets is an exact tie") {
  TempDir tmp("paired");
  PipelineConfig cfg = smoke_config(tmp.str());
  cfg.validate_paired = true;
  const std::string params = tmp.str() + "/same.json";
  pipeline::write_params_file(params, cfg.normal_values);
  pipeline::run_validate_stage(cfg, params, params);
  const auto tj = nlohmann::json::parse(report::read_text_file(tmp.str() + "/validate/ttest.json"));
  CHECK(tj.at("t0").get<double>() == 0.0);
  CHECK(!tj.at("reject_h0").get<bool>());
  CHECK(tj.at("p_two_sided").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("anova table renders in the conventional column order") {
  const auto t = stats::AnovaTable::from_components({{"D", 4.0}}, {1.0}, 8.0, 6.0, 0.05);
  const std::string csv = report::anova_csv(t).str();
  CHECK(csv.rfind("SoV,SS,DoF,MS,Fo,P-Value\n", 0) == 0);
  const std::string txt = report::anova_text(t);
  CHECK(txt.find("SoV") != std::string::npos);
  CHECK(txt.find("Error") != std::string::npos);
  CHECK(txt.find("Total") != std::string::npos);
}

TEST_CASE("anova stage honours a fixed transform exponent") {
  TempDir tmp("fixed_lambda");
  PipelineConfig cfg = smoke_config(tmp.str());
  cfg.stub->intercept = 30.0;  // keep all responses positive
  cfg.stub->sigma = 0.2;
  cfg.transform = "-1.3";
  pipeline::run_screen_stage(cfg);
  pipeline::run_anova_stage(cfg);
  const auto aj = nlohmann::json::parse(report::read_text_file(tmp.str() + "/anova/assumptions.json"));
  CHECK(aj.at("lambda").get<double>() == doctest::Approx(-1.3));
  const auto tj = nlohmann::json::parse(report::read_text_file(tmp.str() + "/anova/transform.json"));
  CHECK(tj.at("mode").get<std::string>() == "fixed");
}

TEST_CASE("cli binary end to end") {
  REQUIRE(fs::exists(kBin));
  TempDir tmp("cli");

  SUBCASE("missing config exits with a usage error") {
    CHECK(run_cli("screen") == 1);
    CHECK(run_cli("--config /nonexistent.json screen") == 1);
  }
  SUBCASE("unknown subcommand fails") {
    CHECK(run_cli("frobnicate") != 0);
  }
  SUBCASE("stub pipeline completes and stages rerun standalone") {
    const std::string base = "--config " + kSmokeJson + " --out-dir " + tmp.str();
    CHECK(run_cli(base + " pipeline") == 0);
    CHECK(run_cli(base + " anova --transform none") == 0);
    CHECK(run_cli(base + " optimize") == 0);
    CHECK(run_cli(base + " validate -n 5") == 0);
    CHECK(fs::exists(tmp.path / "validate/ttest.txt"));
  }
  SUBCASE("a standalone stage run records itself in the manifest") {
    const std::string base = "--config " + kSmokeJson + " --out-dir " + tmp.str();
    CHECK(run_cli(base + " screen") == 0);
    const auto m = nlohmann::json::parse(report::read_text_file(tmp.str() + "/manifest.json"));
    CHECK(m.at("stages").at("screen").at("complete").get<bool>());
    CHECK(m.at("stages").at("screen").at("artifacts").size() == 7);
  }
  SUBCASE("empty selection is a usage error") {
    const std::string base = "--config " + kSmokeJson + " --out-dir " + tmp.str();
    CHECK(run_cli(base + " screen") == 0);
    CHECK(run_cli(base + " anova --selected ,") == 1);
  }
  SUBCASE("malformed model strings and inverted bounds exit 1") {
    const std::string base = "--config " + kSmokeJson + " --out-dir " + tmp.str();
    CHECK(run_cli(base + " screen") == 0);
    CHECK(run_cli(base + " rsm --model '1,x9'") == 1);
    CHECK(run_cli(base + " rsm --model 'x1*'") == 1);
    CHECK(run_cli(base + " rsm") == 0);
    CHECK(run_cli(base + " optimize --bounds 500:25,25:500") == 1);
  }
  SUBCASE("simulate writes a trace with the expected shape") {
    const std::string out = tmp.str() + "/trace";
    CHECK(run_cli("--config " + kIeeeConfig + " --seed 5 simulate --out " + out) == 0);
    REQUIRE(fs::exists(out + ".csv"));
    REQUIRE(fs::exists(out + ".json"));
    const std::string text = report::read_text_file(out + ".csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 152);  // header + 151 points
    const std::string again = tmp.str() + "/trace2";
    CHECK(run_cli("--config " + kIeeeConfig + " --seed 5 simulate --out " + again) == 0);
    CHECK(report::read_text_file(again + ".csv") == text);  // byte identical replay
  }
  SUBCASE("simulate with a missing case exits 1 without outputs") {
    const std::string out = tmp.str() + "/nope";
    CHECK(run_cli("simulate --case /missing.json --out " + out) == 1);
    CHECK(!fs::exists(out + ".csv"));
  }
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "noisyfpr/error.hpp"
#include "noisyfpr/harness.hpp"
#include "noisyfpr/rng.hpp"
#include "noisyfpr/synthetic.hpp"
#include "noisyfpr/theory.hpp"

using namespace noisyfpr;
namespace fs = std::filesystem;

namespace {

ExperimentConfig quick_config() {
  ExperimentConfig cfg;
  cfg.base.n_rounds = 30;
  cfg.micro.n_rounds = 15;
  cfg.k = 5;
  cfg.seed = 17;
  return cfg;
}

const Dataset& transactions() {
  static const Dataset ds = synthetic::card_transactions(4000, 5);
  return ds;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, Validation) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.k = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.fpr_targets = {0.02, 0.01};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.fpr_targets = {0.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.methods.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"methods", {"none", "magic"}}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"k", "ten"}}), ConfigError);
}

TEST(Config, JsonRoundTripAndHash) {
  ExperimentConfig cfg = quick_config();
  cfg.methods = {CleaningMethod::direct, CleaningMethod::none};
  cfg.noise.weighting = NoiseWeighting::uniform;
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), ExperimentConfig::from_json(back.to_json()).to_json());
  EXPECT_EQ(back.methods, (std::vector<CleaningMethod>{CleaningMethod::none, CleaningMethod::direct}));
  EXPECT_EQ(back.hash(), ExperimentConfig::from_json(back.to_json()).hash());
  EXPECT_EQ(back.hash().size(), 16u);
  ExperimentConfig other = back;
  other.seed += 1;
  EXPECT_NE(other.hash(), back.hash());
}

TEST(Config, RelativePathsResolveAgainstConfigFile) {
  const fs::path dir = fs::temp_directory_path() / "noisyfpr_cfg_test";
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"manifest": "m.json", "data": "d.csv", "k": 4})";
  const auto cfg = ExperimentConfig::from_file(dir / "cfg.json");
  EXPECT_EQ(cfg.manifest, dir / "m.json");
  EXPECT_EQ(cfg.k, 4u);
  std::ofstream(dir / "bad.json") << "{";
  EXPECT_THROW(ExperimentConfig::from_file(dir / "bad.json"), ConfigError);
}

TEST(Run, NoNoiseGivesZeroErrorForNone) {
  ExperimentConfig cfg = quick_config();
  cfg.noise.flip_fraction = 0.0;
  const auto r = run_experiment(cfg, transactions());
  for (double t : cfg.fpr_targets) {
    EXPECT_EQ(r.report(CleaningMethod::none, t).relative_error, 0.0);
  }
  EXPECT_EQ(r.meta.flip_budget, 0u);
}

TEST(Run, OneReportPerMethodAndTarget) {
  const auto cfg = quick_config();
  const auto r = run_experiment(cfg, transactions());
  ASSERT_EQ(r.reports.size(), 16u);
  EXPECT_EQ(r.thresholds.size(), 4u);
  EXPECT_EQ(r.meta.n_validation, 1200u);
  EXPECT_EQ(r.meta.n_train, 2800u);
  std::size_t i = 0;
  for (auto m : canonical_method_order(cfg.methods)) {
    for (double t : cfg.fpr_targets) {
      EXPECT_EQ(r.reports[i].method, m);
      EXPECT_EQ(r.reports[i].target_fpr, t);
      ++i;
    }
  }
  const auto& direct = r.assignments.at(CleaningMethod::direct);
  EXPECT_EQ(direct.n_flipped, r.meta.flip_budget);
  EXPECT_LE(r.assignments.at(CleaningMethod::cleanlab).n_flipped, r.meta.flip_budget);
  EXPECT_LE(r.assignments.at(CleaningMethod::micromodel).n_flipped, r.meta.flip_budget);
  EXPECT_EQ(r.validation_noise.n_flipped,
            static_cast<std::size_t>(round_half_up(0.3 * static_cast<double>(r.validation_noise.n_fraud))));
}

TEST(Run, ReproducibleOutputs) {
  const auto cfg = quick_config();
  const fs::path a = fs::temp_directory_path() / "noisyfpr_repro_a";
  const fs::path b = fs::temp_directory_path() / "noisyfpr_repro_b";
  write_outputs(run_experiment(cfg, transactions()), a);
  write_outputs(run_experiment(cfg, transactions()), b);
  for (const char* f : {"results.csv", "tables.md", "noise_report.json", "result.json", "cleaning_direct.csv",
                        "cleaning_micromodel.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty()) << f;
  }
  EXPECT_TRUE(fs::exists(a / "run_meta.json"));
}

TEST(Run, StageErrorsNameTheStage) {
  ExperimentConfig cfg = quick_config();
  cfg.manifest = "/nonexistent/manifest.json";
  try {
    run_experiment(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "manifest");
  }
  const fs::path dir = fs::temp_directory_path() / "noisyfpr_stage_test";
  fs::create_directories(dir);
  std::ofstream(dir / "m.json") << manifest_json(transactions().schema());
  cfg.manifest = dir / "m.json";
  cfg.data = dir / "missing.csv";
  try {
    run_experiment(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "load");
    EXPECT_EQ(e.kind(), StageError::Kind::data);
  }
  cfg.k = 1;
  try {
    run_experiment(cfg, transactions());
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.kind(), StageError::Kind::config);
  }
}

TEST(Tables, ShapeAndFormatting) {
  const auto r = run_experiment(quick_config(), transactions());
  const auto md = emit_tables(r, TableFormat::markdown);
  EXPECT_EQ(count_lines(md), 3u + 4u);
  EXPECT_NE(md.find("| MicroModel |"), std::string::npos);
  EXPECT_NE(md.find("**"), std::string::npos);
  const auto csv = emit_tables(r, TableFormat::csv);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "method,fpr@0.01,err@0.01,fpr@0.02,err@0.02,fpr@0.04,err@0.04,fpr@0.08,err@0.08,best_at");
  EXPECT_EQ(count_lines(csv), 5u);
  const auto& rep = r.report(CleaningMethod::none, 0.01);
  char err[32];
  std::snprintf(err, sizeof err, "%.2f", rep.relative_error);
  EXPECT_NE(csv.find(std::string("None,") ), std::string::npos);
  EXPECT_NE(csv.find(err), std::string::npos);
}

TEST(Tables, SingleMethodHasNoTies) {
  ExperimentConfig cfg = quick_config();
  cfg.methods = {CleaningMethod::direct};
  const auto r = run_experiment(cfg, transactions());
  const auto csv = emit_tables(r, TableFormat::csv);
  EXPECT_EQ(count_lines(csv), 2u);
  EXPECT_NE(csv.find("0.01;0.02;0.04;0.08"), std::string::npos);
}

TEST(Result, JsonRoundTripReproducesTables) {
  const auto r = run_experiment(quick_config(), transactions());
  const auto back = ExperimentResult::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_EQ(emit_tables(back, TableFormat::markdown), emit_tables(r, TableFormat::markdown));
  EXPECT_EQ(emit_tables(back, TableFormat::csv), emit_tables(r, TableFormat::csv));
}

TEST(TheorySuite, ZeroTrialsRejected) {
  TheorySuiteConfig cfg;
  cfg.trials = 0;
  EXPECT_THROW(run_theory_suite(cfg), std::invalid_argument);
}

TEST(TheorySuite, ExactFormsPassAndReportIsReplayable) {
  TheorySuiteConfig cfg;
  cfg.trials = 60;
  cfg.extremality_trials = 30;
  cfg.n_max = 9;
  cfg.stated_forms = false;
  const auto rep = run_theory_suite(cfg);
  EXPECT_TRUE(rep.pass) << rep.report.dump(2);
  EXPECT_EQ(rep.report["checks"]["extremality"]["instances"], 30);

  cfg.stated_forms = true;
  const auto stated = run_theory_suite(cfg);
  EXPECT_FALSE(stated.pass);
  const auto& failing = stated.report["checks"]["proposition_fpr_stated"]["failing"];
  ASSERT_FALSE(failing.empty());
  const auto w = theory::EmpiricalWorld::from_json(failing[0]["world"]);
  EXPECT_FALSE(theory::check_proposition_fpr(w, failing[0]["t"].get<double>()).pass);
  EXPECT_EQ(run_theory_suite(cfg).report, stated.report);
}

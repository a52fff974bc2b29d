#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "noisyfpr/error.hpp"
#include "noisyfpr/harness.hpp"
#include "noisyfpr/synthetic.hpp"

namespace fs = std::filesystem;
using namespace noisyfpr;

namespace {

enum Exit { ok = 0, config_error = 1, data_error = 2, check_failure = 3 };

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  const ExperimentResult result = run_experiment(cfg);
  const fs::path dir = out_override.empty() ? cfg.output_dir : fs::path(out_override);
  write_outputs(result, dir);
  std::cout << emit_tables(result, TableFormat::markdown);
  std::cerr << "wrote " << dir.string() << " (config " << result.meta.config_hash << ")\n";
  return ok;
}

int cmd_theory(const TheorySuiteConfig& cfg, const std::string& out) {
  const TheorySuiteReport rep = run_theory_suite(cfg);
  const std::string text = rep.report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  for (const auto& [name, check] : rep.report["checks"].items()) {
    std::cerr << (check["pass"].get<bool>() ? "pass " : "FAIL ") << name << " (" << check["failures"].get<std::size_t>()
              << "/" << check["evaluations"].get<std::size_t>() << " failing)\n";
  }
  return rep.pass ? ok : check_failure;
}

int cmd_emit(const std::string& result_path, const std::string& format, const std::string& out) {
  std::ifstream in(result_path);
  if (!in) throw DataError("cannot open " + result_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed result document: ") + e.what());
  }
  const ExperimentResult result = ExperimentResult::from_json(j);
  const std::string text = emit_tables(result, format == "csv" ? TableFormat::csv : TableFormat::markdown);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return ok;
}

int cmd_synth(std::size_t rows, std::uint64_t seed, double fraud_rate, const std::string& out_dir) {
  const Dataset ds = synthetic::card_transactions(rows, seed, fraud_rate);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_text(dir / "manifest.json", manifest_json(ds.schema()));
  std::ofstream out(dir / "transactions.csv", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "transactions.csv").string());
  write_dataset_csv(ds, out);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-noise FPR estimation experiments"};
  app.require_subcommand(1);

  std::string config_path, run_out;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("--config", config_path, "Experiment config")->required();
  run->add_option("--out", run_out, "Output directory (overrides output_dir)");

  TheorySuiteConfig tcfg;
  std::string theory_out, forms = "both";
  auto* theory = app.add_subcommand("theory-check", "Seeded property suite for the identities and extremality");
  theory->add_option("--trials", tcfg.trials, "Random worlds")->default_val(tcfg.trials);
  theory->add_option("--seed", tcfg.seed, "Master seed")->default_val(tcfg.seed);
  theory->add_option("--n", tcfg.n, "World size")->default_val(tcfg.n);
  theory->add_option("--extremality-trials", tcfg.extremality_trials, "Enumeration instances")
      ->default_val(tcfg.extremality_trials);
  theory->add_option("--n-max", tcfg.n_max, "Largest enumeration instance")->default_val(tcfg.n_max);
  theory->add_option("--forms", forms, "Identity forms to check")
      ->check(CLI::IsMember({"stated", "exact", "both"}))
      ->default_val(forms);
  theory->add_option("--out", theory_out, "Report path (default stdout)");

  std::string result_path, format = "markdown", emit_out;
  auto* emit = app.add_subcommand("emit", "Render tables from a result.json");
  emit->add_option("--result", result_path, "result.json from a run")->required();
  emit->add_option("--format", format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  emit->add_option("--out", emit_out, "Output path (default stdout)");

  std::size_t rows = 50000;
  std::uint64_t synth_seed = 0;
  double fraud_rate = 0.057;
  std::string synth_dir = "synthetic";
  auto* synth = app.add_subcommand("synth", "Write a simulated card-transaction dataset and manifest");
  synth->add_option("--rows", rows, "Row count")->default_val(rows);
  synth->add_option("--seed", synth_seed, "Seed")->default_val(synth_seed);
  synth->add_option("--fraud-rate", fraud_rate, "Expected fraud rate")->default_val(fraud_rate);
  synth->add_option("--out-dir", synth_dir, "Output directory")->default_val(synth_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run) return cmd_run(config_path, run_out);
    if (*theory) {
      tcfg.stated_forms = forms != "exact";
      tcfg.exact_forms = forms != "stated";
      return cmd_theory(tcfg, theory_out);
    }
    if (*emit) return cmd_emit(result_path, format, emit_out);
    if (*synth) return cmd_synth(rows, synth_seed, fraud_rate, synth_dir);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == StageError::Kind::config ? config_error : data_error;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const CheckFailure& e) {
    std::cerr << "check failure: " << e.what() << '\n';
    return check_failure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return data_error;
  }
  return ok;
}

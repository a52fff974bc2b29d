#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "noisyfpr/cleaning.hpp"
#include "noisyfpr/error.hpp"
#include "noisyfpr/learner.hpp"
#include "noisyfpr/metrics.hpp"
#include "noisyfpr/noise.hpp"
#include "noisyfpr/tabular.hpp"

namespace noisyfpr {

struct ExperimentConfig {
  std::filesystem::path manifest;
  std::filesystem::path data;
  double validation_fraction = 0.3;
  NoiseSpec noise;  // seed is ignored; stage seeds derive from `seed`
  GbdtConfig base;
  GbdtConfig micro = GbdtConfig::micro_defaults();
  std::size_t k = 10;
  std::vector<double> fpr_targets{0.01, 0.02, 0.04, 0.08};
  std::vector<CleaningMethod> methods{CleaningMethod::none, CleaningMethod::cleanlab, CleaningMethod::micromodel,
                                      CleaningMethod::direct};
  double vote_threshold = 0.5;
  std::size_t max_rows = 0;  // 0 keeps every row
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  /// Relative manifest/data/output paths resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// FNV-1a of the canonical JSON form, as 16 hex digits.
  std::string hash() const;
};

/// Methods in table order (none, cleanlab, micromodel, direct), deduplicated.
std::vector<CleaningMethod> canonical_method_order(std::vector<CleaningMethod> methods);

/// A pipeline stage failed; `stage()` names it.
class StageError : public Error {
 public:
  enum class Kind { config, data };
  StageError(std::string stage, Kind kind, const std::string& cause)
      : Error("stage " + stage + ": " + cause), stage_(std::move(stage)), kind_(kind) {}
  const std::string& stage() const noexcept { return stage_; }
  Kind kind() const noexcept { return kind_; }

 private:
  std::string stage_;
  Kind kind_;
};

struct RunMetadata {
  std::uint64_t master_seed = 0;
  std::map<std::string, std::uint64_t> stage_seeds;
  std::string config_hash;
  std::size_t n_examples = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  double known_fraud_rate = 0.0;   // p(y=1) on validation, from the noise level
  std::size_t flip_budget = 0;     // calibrated m on validation
  std::map<std::string, double> timings_seconds;  // excluded from reproducible artifacts
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MetricsReport> reports;  // canonical method order, targets ascending
  std::vector<ThresholdReport> thresholds;
  NoiseReport train_noise;
  NoiseReport validation_noise;
  std::map<CleaningMethod, CleaningAssignment> assignments;
  RunMetadata meta;

  /// Throws std::out_of_range when absent.
  const MetricsReport& report(CleaningMethod method, double target) const;

  nlohmann::json to_json() const;  // no timings, no assignments
  static ExperimentResult from_json(const nlohmann::json& j);
};

/// load -> split -> noise (train and validation, independent seeds) -> base
/// model on noisy train -> true thresholds on clean validation -> clean noisy
/// validation -> evaluate at the true thresholds.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& ds);

enum class TableFormat { csv, markdown };

/// Methods as rows; per target ascending an (fpr estimate, err) column pair.
/// The lowest err per target (at printed precision) is flagged.
std::string emit_tables(const ExperimentResult& result, TableFormat format);

/// Long-form MetricsReport rows.
std::string results_csv(const ExperimentResult& result);
std::string noise_report_json(const ExperimentResult& result);

/// results.csv, tables.md, noise_report.json, result.json, run_meta.json and
/// one cleaning_<method>.csv per method.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct TheorySuiteConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::size_t n = 50;
  std::size_t extremality_trials = 500;
  std::size_t n_max = 12;
  bool stated_forms = true;  // include the identities with marginal coefficients
  bool exact_forms = true;
};

struct TheorySuiteReport {
  nlohmann::json report;
  bool pass = false;
};

/// Seeded property suite over every identity check plus the extremality
/// oracle. Failing worlds are serialized with their replay seeds.
/// Throws std::invalid_argument when trials == 0.
TheorySuiteReport run_theory_suite(const TheorySuiteConfig& cfg);

}  // namespace noisyfpr

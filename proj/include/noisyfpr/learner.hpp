#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "noisyfpr/kernels.hpp"
#include "noisyfpr/tabular.hpp"
#include "noisyfpr/tree.hpp"

namespace noisyfpr {

struct GbdtConfig {
  int n_rounds = 500;
  int max_depth = 6;
  double learning_rate = 0.1;
  int n_bins = 64;
  int min_leaf = 5;
  double l2 = 1.0;          // leaf weight regularization
  double subsample = 1.0;   // row fraction per round; < 1 draws from `seed`
  std::uint64_t seed = 0;

  /// Weaker ensemble members: same learner, fewer rounds.
  static GbdtConfig micro_defaults();

  /// Throws ConfigError on an out-of-range field.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep the values of `defaults`.
  static GbdtConfig from_json(const nlohmann::json& j);
  static GbdtConfig from_json(const nlohmann::json& j, const GbdtConfig& defaults);

  bool operator==(const GbdtConfig&) const = default;
};

enum class LabelSource { observed, truth };

/// Smoothed per-category mean of the training label; unseen tokens map to the prior.
struct CategoryEncoder {
  static constexpr double kSmoothing = 10.0;

  double prior = 0.0;
  std::map<std::string, double, std::less<>> values;

  double encode(std::string_view token) const;
  bool operator==(const CategoryEncoder&) const = default;
};

/// Trained gradient-boosted tree ensemble scoring examples into [0, 1].
class Model {
 public:
  double raw_score(const Example& ex) const;
  double score(const Example& ex) const;
  /// Scores every example; output is aligned with ds.examples().
  std::vector<double> scores(const Dataset& ds) const;

  /// Encoded matrix the trees operate on (categoricals replaced by their statistic).
  kernels::DenseMatrix encode(const Dataset& ds) const;

  /// Throws std::invalid_argument when feature count or kinds differ.
  void check_compatible(const FeatureSchema& schema) const;

  bool degenerate() const noexcept { return degenerate_; }
  double base_log_odds() const noexcept { return base_log_odds_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  const GbdtConfig& config() const noexcept { return config_; }
  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }

  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& j);

  bool operator==(const Model&) const = default;

 private:
  friend struct ModelBuilder;
  Model() = default;

  GbdtConfig config_;
  std::vector<ColumnSpec> columns_;
  std::vector<std::optional<CategoryEncoder>> encoders_;  // set for categorical columns
  std::vector<RegressionTree> trees_;
  double base_log_odds_ = 0.0;
  bool degenerate_ = false;
};

struct TrainResult {
  Model model;
  std::vector<double> loss_per_round;  // mean logistic loss after each round
  double initial_loss = 0.0;
};

struct ScoredExample {
  ExampleId id = 0;
  double score = 0.0;
  Label y_true = 0;
  Label y_observed = 0;
  bool operator==(const ScoredExample&) const = default;
};

double sigmoid(double raw);

/// Logistic-loss GBDT with histogram split finding. Rows are processed in
/// ascending id order, so training is invariant to row permutations.
/// Single-class data yields a constant, degenerate model (not an error).
TrainResult train_with_trace(const Dataset& ds, LabelSource labels, const GbdtConfig& cfg);
Model train(const Dataset& ds, LabelSource labels, const GbdtConfig& cfg);

/// One ScoredExample per input example, in input order.
std::vector<ScoredExample> predict(const Model& model, const Dataset& ds);

/// Shuffled disjoint slices of `train`, one model per slice trained on
/// observed labels. Member i uses a seed derived from (seed, i).
std::vector<Model> train_micromodels(const Dataset& train, std::size_t k, const GbdtConfig& cfg,
                                     std::uint64_t seed);

}  // namespace noisyfpr

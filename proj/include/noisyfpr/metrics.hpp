#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "noisyfpr/cleaning.hpp"
#include "noisyfpr/learner.hpp"

namespace noisyfpr {

/// Chooses which label (true, observed, or cleaned) each scored example carries.
class LabelSelector {
 public:
  static LabelSelector truth();
  static LabelSelector observed();
  /// The assignment must outlive the selector.
  static LabelSelector cleaned(const CleaningAssignment& assign);

  Label label(const ScoredExample& s) const;
  const char* name() const;

 private:
  enum class Kind { truth, observed, cleaned };
  explicit LabelSelector(Kind k) : kind_(k) {}
  Kind kind_;
  std::unordered_map<ExampleId, Label> cleaned_;
};

/// p(f > t | label = given) as an exact count ratio. Throws std::invalid_argument
/// when no example carries `given`.
double rate_at_threshold(std::span<const ScoredExample> scored, double t, const LabelSelector& labels,
                         Label given);

struct ThresholdReport {
  double target_fpr = 0.0;
  double threshold = 0.0;
  double achieved_fpr = 0.0;
  nlohmann::json to_json() const;
};

/// Smallest observed score t with p(f > t | label = 0) <= target; the achieved
/// FPR is the largest reachable value not above the target.
ThresholdReport threshold_for_fpr(std::span<const ScoredExample> scored, const LabelSelector& labels,
                                  double target_fpr);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// One point per distinct score (ascending thresholds) plus the sentinel below
/// the minimum, which has fpr = tpr = 1.
std::vector<RocPoint> roc_curve(std::span<const ScoredExample> scored, const LabelSelector& labels);

/// Mann-Whitney AUC with ties counted as one half.
double auc(std::span<const double> scores, std::span<const Label> labels);

struct MetricsReport {
  CleaningMethod method = CleaningMethod::none;
  double target_fpr = 0.0;
  double threshold = 0.0;
  double fpr_estimate = 0.0;  // p(f > t | c = 0)
  double tpr_estimate = 0.0;  // p(f > t | c = 1)
  double fpr_actual = 0.0;    // p(f > t | y = 0)
  double tpr_actual = 0.0;    // p(f > t | y = 1)
  double delta_fpr = 0.0;     // fpr_actual - fpr_estimate
  double relative_error = 0.0;         // |delta_fpr| / target
  double signed_relative_error = 0.0;  // delta_fpr / target
  std::size_t n_flipped = 0;
  double achieved_fraud_rate = 0.0;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

MetricsReport evaluate_method(std::span<const ScoredExample> scored, const CleaningAssignment& assign, double t,
                              double target_fpr);

}  // namespace noisyfpr

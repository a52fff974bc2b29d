#include "noisyfpr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "noisyfpr/error.hpp"

namespace noisyfpr {

LabelSelector LabelSelector::truth() { return LabelSelector(Kind::truth); }
LabelSelector LabelSelector::observed() { return LabelSelector(Kind::observed); }

LabelSelector LabelSelector::cleaned(const CleaningAssignment& assign) {
  LabelSelector sel(Kind::cleaned);
  sel.cleaned_.reserve(assign.size());
  for (const auto& l : assign.labels) sel.cleaned_.emplace(l.id, l.cleaned);
  return sel;
}

Label LabelSelector::label(const ScoredExample& s) const {
  switch (kind_) {
    case Kind::truth: return s.y_true;
    case Kind::observed: return s.y_observed;
    case Kind::cleaned: {
      const auto it = cleaned_.find(s.id);
      if (it == cleaned_.end()) {
        throw std::invalid_argument("cleaning assignment has no label for id " + std::to_string(s.id));
      }
      return it->second;
    }
  }
  return 0;
}

const char* LabelSelector::name() const {
  switch (kind_) {
    case Kind::truth: return "y";
    case Kind::observed: return "y*";
    case Kind::cleaned: return "c";
  }
  return "?";
}

double rate_at_threshold(std::span<const ScoredExample> scored, double t, const LabelSelector& labels,
                         Label given) {
  std::size_t total = 0, above = 0;
  for (const auto& s : scored) {
    if (labels.label(s) != given) continue;
    ++total;
    if (s.score > t) ++above;
  }
  if (total == 0) {
    throw std::invalid_argument(std::string("no examples with ") + labels.name() + " = " +
                                std::to_string(static_cast<int>(given)));
  }
  return static_cast<double>(above) / static_cast<double>(total);
}

nlohmann::json ThresholdReport::to_json() const {
  return {{"target_fpr", target_fpr}, {"threshold", threshold}, {"achieved_fpr", achieved_fpr}};
}

ThresholdReport threshold_for_fpr(std::span<const ScoredExample> scored, const LabelSelector& labels,
                                  double target_fpr) {
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) throw std::invalid_argument("target FPR must lie in (0, 1)");
  std::vector<double> negatives;
  for (const auto& s : scored) {
    if (labels.label(s) == 0) negatives.push_back(s.score);
  }
  if (negatives.empty()) throw std::invalid_argument("threshold search needs at least one negative");
  std::sort(negatives.begin(), negatives.end(), std::greater<>());
  const std::size_t n = negatives.size();

  // Largest exceedance count k with k / n <= target. t = (k+1)-th largest
  // negative score admits at most k exceedances, and no smaller t does.
  std::size_t k = 0;
  while (k + 1 < n && static_cast<double>(k + 1) / static_cast<double>(n) <= target_fpr) ++k;
  const double t = negatives[k];
  const auto exceed = static_cast<std::size_t>(
      std::count_if(negatives.begin(), negatives.end(), [t](double v) { return v > t; }));
  return {target_fpr, t, static_cast<double>(exceed) / static_cast<double>(n)};
}

std::vector<RocPoint> roc_curve(std::span<const ScoredExample> scored, const LabelSelector& labels) {
  std::vector<std::pair<double, Label>> rows;
  rows.reserve(scored.size());
  std::size_t pos = 0, neg = 0;
  for (const auto& s : scored) {
    const Label l = labels.label(s);
    rows.emplace_back(s.score, l);
    (l ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("ROC curve needs both classes");
  std::sort(rows.begin(), rows.end());
  std::vector<RocPoint> out;
  out.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
  // Walking ascending, everything at or below the current score is excluded.
  std::size_t pos_below = 0, neg_below = 0;
  for (std::size_t i = 0; i < rows.size();) {
    const double s = rows[i].first;
    for (; i < rows.size() && rows[i].first == s; ++i) (rows[i].second ? pos_below : neg_below) += 1;
    out.push_back({s, static_cast<double>(neg - neg_below) / static_cast<double>(neg),
                   static_cast<double>(pos - pos_below) / static_cast<double>(pos)});
  }
  return out;
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t r = i; r < j; ++r) {
      if (labels[idx[r]]) {
        rank_sum += mid_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = idx.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("auc needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

nlohmann::json MetricsReport::to_json() const {
  return {{"method", to_string(method)},
          {"target_fpr", target_fpr},
          {"threshold", threshold},
          {"fpr_estimate", fpr_estimate},
          {"tpr_estimate", tpr_estimate},
          {"fpr_actual", fpr_actual},
          {"tpr_actual", tpr_actual},
          {"delta_fpr", delta_fpr},
          {"relative_error", relative_error},
          {"signed_relative_error", signed_relative_error},
          {"n_flipped", n_flipped},
          {"achieved_fraud_rate", achieved_fraud_rate}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.method = cleaning_method_from_string(j.at("method").get<std::string>());
    r.target_fpr = j.at("target_fpr").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.fpr_estimate = j.at("fpr_estimate").get<double>();
    r.tpr_estimate = j.at("tpr_estimate").get<double>();
    r.fpr_actual = j.at("fpr_actual").get<double>();
    r.tpr_actual = j.at("tpr_actual").get<double>();
    r.delta_fpr = j.at("delta_fpr").get<double>();
    r.relative_error = j.at("relative_error").get<double>();
    r.signed_relative_error = j.at("signed_relative_error").get<double>();
    r.n_flipped = j.at("n_flipped").get<std::size_t>();
    r.achieved_fraud_rate = j.at("achieved_fraud_rate").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics row: ") + e.what());
  }
  return r;
}

MetricsReport evaluate_method(std::span<const ScoredExample> scored, const CleaningAssignment& assign, double t,
                              double target_fpr) {
  if (!(target_fpr > 0.0)) throw std::invalid_argument("target FPR must be positive");
  if (assign.size() != scored.size()) throw std::invalid_argument("assignment does not cover the scored examples");
  const auto cleaned = LabelSelector::cleaned(assign);
  const auto truth = LabelSelector::truth();
  MetricsReport r;
  r.method = assign.method;
  r.target_fpr = target_fpr;
  r.threshold = t;
  r.fpr_estimate = rate_at_threshold(scored, t, cleaned, 0);
  r.tpr_estimate = rate_at_threshold(scored, t, cleaned, 1);
  r.fpr_actual = rate_at_threshold(scored, t, truth, 0);
  r.tpr_actual = rate_at_threshold(scored, t, truth, 1);
  r.delta_fpr = r.fpr_actual - r.fpr_estimate;
  r.signed_relative_error = r.delta_fpr / target_fpr;
  r.relative_error = std::fabs(r.delta_fpr) / target_fpr;
  r.n_flipped = assign.n_flipped;
  r.achieved_fraud_rate = assign.achieved_fraud_rate;
  return r;
}

}  // namespace noisyfpr

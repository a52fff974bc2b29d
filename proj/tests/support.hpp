#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "noisyfpr/learner.hpp"
#include "noisyfpr/rng.hpp"
#include "noisyfpr/tabular.hpp"

namespace noisyfpr::fixtures {

inline FeatureSchema numeric_schema(std::size_t d) {
  std::vector<ColumnSpec> cols;
  for (std::size_t j = 0; j < d; ++j) cols.push_back({"x" + std::to_string(j), FeatureKind::numeric});
  return FeatureSchema(std::move(cols), "label", "ts");
}

inline Example numeric_example(ExampleId id, std::vector<double> xs, Label y, Label y_obs, std::int64_t ts = 0) {
  Example ex;
  ex.id = id;
  ex.y_true = y;
  ex.y_observed = y_obs;
  ex.timestamp_ms = ts;
  for (double x : xs) ex.features.push_back(FeatureValue::numeric(x));
  return ex;
}

/// Labels from a fixed hyperplane with a margin around it kept empty.
inline Dataset separable(std::size_t n, std::size_t d, std::uint64_t seed, double margin = 0.25) {
  Rng rng(seed);
  std::vector<double> w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = 1.0 + 0.5 * static_cast<double>(j % 3);
  const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
  std::vector<Example> out;
  while (out.size() < n) {
    std::vector<double> xs(d);
    for (double& x : xs) x = rng.normal();
    const double s = std::inner_product(w.begin(), w.end(), xs.begin(), 0.0) / norm;
    if (std::fabs(s) < margin) continue;
    const Label y = s > 0 ? 1 : 0;
    out.push_back(numeric_example(static_cast<ExampleId>(out.size()), xs, y, y,
                                  static_cast<std::int64_t>(out.size())));
  }
  return Dataset(numeric_schema(d), std::move(out));
}

/// Pairwise AUC oracle: fraction of (positive, negative) pairs ranked correctly, ties half.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) good += 1.0;
      if (scores[i] == scores[j]) good += 0.5;
    }
  }
  return good / pairs;
}

inline std::vector<Label> true_labels(const Dataset& ds) {
  std::vector<Label> out;
  for (const auto& ex : ds.examples()) out.push_back(ex.y_true);
  return out;
}

inline std::vector<ScoredExample> scored(const std::vector<double>& scores, const std::vector<Label>& y,
                                         const std::vector<Label>& y_obs) {
  std::vector<ScoredExample> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back({static_cast<ExampleId>(i), scores[i], y[i], y_obs[i]});
  }
  return out;
}

}  // namespace noisyfpr::fixtures

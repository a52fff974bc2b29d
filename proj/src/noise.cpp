#include "noisyfpr/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "noisyfpr/rng.hpp"

namespace noisyfpr {

const char* to_string(NoiseWeighting w) {
  return w == NoiseWeighting::time_linear ? "time_linear" : "uniform";
}

nlohmann::json NoiseReport::to_json() const {
  return {{"n_fraud", n_fraud},
          {"n_flipped", n_flipped},
          {"realized_noise_rate", realized_noise_rate},
          {"flipped_ids", flipped_ids}};
}

std::pair<Dataset, NoiseReport> inject_noise(const Dataset& ds, const NoiseSpec& spec) {
  if (!(spec.flip_fraction >= 0.0 && spec.flip_fraction <= 1.0)) {
    throw std::invalid_argument("flip_fraction must lie in [0, 1]");
  }
  std::vector<std::size_t> fraud;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].y_true != ds[i].y_observed) {
      throw std::invalid_argument("inject_noise expects a clean dataset (y_true = y_observed)");
    }
    if (ds[i].y_true == 1) fraud.push_back(i);
  }
  if (spec.flip_fraction > 0.0 && fraud.empty()) {
    throw std::invalid_argument("cannot flip fraud labels: dataset has no fraud examples");
  }

  NoiseReport report;
  report.n_fraud = fraud.size();
  const auto n_flip = static_cast<std::size_t>(
      round_half_up(spec.flip_fraction * static_cast<double>(fraud.size())));

  std::vector<std::size_t> chosen;
  if (n_flip > 0) {
    // Efraimidis-Spirakis: the n_flip largest keys log(u)/w are a weighted
    // sample without replacement.
    std::int64_t oldest = ds[0].timestamp_ms;
    for (const auto& ex : ds.examples()) oldest = std::min(oldest, ex.timestamp_ms);
    Rng rng(spec.seed);
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(fraud.size());
    for (std::size_t i : fraud) {
      const double w = spec.weighting == NoiseWeighting::time_linear
                           ? static_cast<double>(ds[i].timestamp_ms - oldest) + 1.0
                           : 1.0;
      keyed.emplace_back(std::log(rng.uniform_open_zero()) / w, i);
    }
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(n_flip), keyed.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    for (std::size_t r = 0; r < n_flip; ++r) chosen.push_back(keyed[r].second);
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<Example> out = ds.examples();
  for (std::size_t i : chosen) {
    out[i].y_observed = 0;
    report.flipped_ids.push_back(out[i].id);
  }
  std::sort(report.flipped_ids.begin(), report.flipped_ids.end());
  report.n_flipped = chosen.size();

  const std::size_t observed_negative = static_cast<std::size_t>(
      std::count_if(out.begin(), out.end(), [](const Example& e) { return e.y_observed == 0; }));
  report.realized_noise_rate =
      observed_negative == 0 ? 0.0 : static_cast<double>(report.n_flipped) / static_cast<double>(observed_negative);
  return {Dataset(ds.schema(), std::move(out)), std::move(report)};
}

double true_fraud_rate_from_noise(double p_y1_given_ystar0, double p_ystar1) {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(p_y1_given_ystar0) || !in_unit(p_ystar1)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  return p_ystar1 + p_y1_given_ystar0 * (1.0 - p_ystar1);
}

}  // namespace noisyfpr

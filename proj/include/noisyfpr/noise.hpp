#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "json.hpp"
#include "noisyfpr/tabular.hpp"

namespace noisyfpr {

enum class NoiseWeighting { time_linear, uniform };

struct NoiseSpec {
  double flip_fraction = 0.30;
  NoiseWeighting weighting = NoiseWeighting::time_linear;
  std::uint64_t seed = 0;
};

struct NoiseReport {
  std::size_t n_fraud = 0;
  std::size_t n_flipped = 0;
  std::vector<ExampleId> flipped_ids;  // ascending
  double realized_noise_rate = 0.0;    // p(y = 1 | y* = 0) after injection

  nlohmann::json to_json() const;
  bool operator==(const NoiseReport&) const = default;
};

/// Flips round(flip_fraction * n_fraud) fraud labels to 0, sampled without
/// replacement. Under time_linear the weight of example i is
/// (timestamp_i - oldest timestamp in ds) + 1 ms, so recent fraud is more
/// likely to be unlabeled. y_true is never touched.
std::pair<Dataset, NoiseReport> inject_noise(const Dataset& ds, const NoiseSpec& spec);

/// Fraud rate p(y=1) = p(y*=1) + p(y=1 | y*=0) * (1 - p(y*=1)), which holds
/// when p(y=1 | y*=1) = 1 under class-conditional noise.
double true_fraud_rate_from_noise(double p_y1_given_ystar0, double p_ystar1);

const char* to_string(NoiseWeighting w);

}  // namespace noisyfpr

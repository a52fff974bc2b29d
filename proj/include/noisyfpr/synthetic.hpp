#pragma once

#include <cstdint>

#include "noisyfpr/tabular.hpp"

namespace noisyfpr::synthetic {

/// Schema of the card-transaction generator: 10 categorical and 6 numeric
/// features, label `is_fraud`, timestamp `trans_time_ms`.
FeatureSchema card_transactions_schema();

/// Simulated card transactions (cardholder profiles, merchants, categories,
/// amounts, local hour). Each row is fraud with probability `fraud_rate`;
/// fraud rows come from compromised cards and follow a distinct spend profile
/// (online and grocery categories, large amounts, late hours) that overlaps
/// the legitimate one. Time does not enter the label.
Dataset card_transactions(std::size_t n, std::uint64_t seed, double fraud_rate = 0.057);

}  // namespace noisyfpr::synthetic

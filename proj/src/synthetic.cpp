#include "noisyfpr/synthetic.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisyfpr/rng.hpp"

namespace noisyfpr::synthetic {
namespace {

struct Category {
  const char* name;
  double weight;        // legitimate spend mix
  double fraud_weight;  // spend mix under a fraud profile
  double log_amount_mean;
  double fraud_log_amount_mean;
};

constexpr std::array<Category, 14> kCategories{{
    {"gas_transport", 10.0, 5.0, 4.1, 2.4},  {"grocery_pos", 9.5, 26.0, 4.6, 5.7},
    {"home", 9.5, 2.0, 3.9, 5.4},            {"shopping_pos", 9.0, 9.0, 4.0, 6.6},
    {"kids_pets", 8.7, 2.0, 3.9, 3.0},       {"shopping_net", 7.5, 28.0, 4.2, 6.8},
    {"entertainment", 7.2, 2.0, 3.9, 5.9},   {"food_dining", 7.0, 1.5, 3.7, 4.7},
    {"personal_care", 7.0, 2.0, 3.6, 3.2},   {"health_fitness", 6.6, 1.5, 3.9, 3.0},
    {"misc_pos", 6.1, 3.0, 3.8, 5.4},        {"misc_net", 4.9, 14.0, 4.0, 6.6},
    {"grocery_net", 3.5, 2.0, 3.9, 2.8},     {"travel", 3.1, 2.0, 4.3, 2.3},
}};

constexpr std::array<const char*, 50> kStates{
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL", "IN", "IA", "KS", "KY",
    "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND",
    "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY"};

struct City {
  std::string name;
  std::size_t state;
  std::string zip;
  double lat;
  double lon;
  double population;
};

struct Card {
  std::string number;
  std::string first;
  std::string last;
  std::string gender;
  std::string job;
  std::size_t city;
  double age;
  double risk;
};

std::size_t pick_weighted(Rng& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  std::size_t lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cumulative[mid] > u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> out;
  double acc = 0.0;
  for (double w : weights) out.push_back(acc += w);
  return out;
}

}  // namespace

FeatureSchema card_transactions_schema() {
  std::vector<ColumnSpec> cols{
      {"cc_num", FeatureKind::categorical}, {"merchant", FeatureKind::categorical},
      {"category", FeatureKind::categorical}, {"first", FeatureKind::categorical},
      {"last", FeatureKind::categorical},   {"gender", FeatureKind::categorical},
      {"city", FeatureKind::categorical},   {"state", FeatureKind::categorical},
      {"zip", FeatureKind::categorical},    {"job", FeatureKind::categorical},
      {"amt", FeatureKind::numeric},        {"lat", FeatureKind::numeric},
      {"long", FeatureKind::numeric},       {"city_pop", FeatureKind::numeric},
      {"age", FeatureKind::numeric},        {"hour", FeatureKind::numeric},
  };
  return FeatureSchema(std::move(cols), "is_fraud", "trans_time_ms");
}

Dataset card_transactions(std::size_t n, std::uint64_t seed, double fraud_rate) {
  if (n == 0) throw std::invalid_argument("card_transactions: n must be positive");
  if (!(fraud_rate > 0.0 && fraud_rate < 1.0)) throw std::invalid_argument("fraud_rate must lie in (0, 1)");
  Rng rng(seed);

  std::vector<City> cities(300);
  for (std::size_t i = 0; i < cities.size(); ++i) {
    City& c = cities[i];
    c.name = "city_" + std::to_string(i);
    c.state = static_cast<std::size_t>(rng.below(kStates.size()));
    c.zip = std::to_string(10000 + rng.below(89999));
    c.lat = 25.0 + 23.0 * rng.uniform();
    c.lon = -124.0 + 57.0 * rng.uniform();
    c.population = std::round(std::exp(6.0 + 2.5 * std::fabs(rng.normal())));
  }

  const std::size_t n_cards = std::max<std::size_t>(20, n / 60);
  std::vector<Card> cards(n_cards);
  std::vector<std::size_t> compromised;
  for (std::size_t i = 0; i < n_cards; ++i) {
    Card& c = cards[i];
    c.number = std::to_string(4000000000000000ULL + rng.below(999999999999ULL));
    c.first = "first_" + std::to_string(rng.below(120));
    c.last = "last_" + std::to_string(rng.below(200));
    c.gender = rng.bernoulli(0.55) ? "F" : "M";
    c.job = "job_" + std::to_string(rng.below(150));
    c.city = static_cast<std::size_t>(rng.below(cities.size()));
    c.age = 18.0 + 70.0 * rng.uniform();
    if (rng.bernoulli(0.25)) compromised.push_back(i);
  }
  if (compromised.empty()) compromised.push_back(0);

  std::vector<double> legit_cat, fraud_cat;
  for (const auto& c : kCategories) {
    legit_cat.push_back(c.weight);
    fraud_cat.push_back(c.fraud_weight);
  }
  const auto legit_cat_cum = cumulative(legit_cat);
  const auto fraud_cat_cum = cumulative(fraud_cat);
  std::vector<double> legit_hour, fraud_hour;
  for (int h = 0; h < 24; ++h) {
    legit_hour.push_back((h >= 6 && h <= 23) ? 1.0 : 0.35);
    fraud_hour.push_back((h >= 22 || h <= 3) ? 4.0 : 0.5);
  }
  const auto legit_hour_cum = cumulative(legit_hour);
  const auto fraud_hour_cum = cumulative(fraud_hour);

  constexpr std::int64_t kStart = 1546300800000;  // 2019-01-01T00:00:00Z
  constexpr std::int64_t kDays = 540;

  const FeatureSchema schema = card_transactions_schema();
  std::vector<Example> examples;
  examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool fraud = rng.bernoulli(fraud_rate);
    const std::size_t card_index =
        fraud ? compromised[static_cast<std::size_t>(rng.below(compromised.size()))]
              : static_cast<std::size_t>(rng.below(n_cards));
    const Card& card = cards[card_index];
    const City& city = cities[card.city];
    const std::size_t cat = pick_weighted(rng, fraud ? fraud_cat_cum : legit_cat_cum);
    const int hour = static_cast<int>(pick_weighted(rng, fraud ? fraud_hour_cum : legit_hour_cum));
    const std::int64_t day = static_cast<std::int64_t>(rng.below(kDays));
    const std::int64_t ts = kStart + day * 86'400'000 + hour * 3'600'000LL +
                            static_cast<std::int64_t>(rng.below(3'600'000));
    const double log_amt = fraud ? kCategories[cat].fraud_log_amount_mean + 0.6 * rng.normal()
                                 : kCategories[cat].log_amount_mean + 0.9 * rng.normal();
    const double amt = std::round(std::exp(log_amt) * 100.0) / 100.0 + 1.0;
    const std::string merchant = std::string("merchant_") + kCategories[cat].name + "_" + std::to_string(rng.below(40));

    Example ex;
    ex.id = static_cast<ExampleId>(i);
    ex.timestamp_ms = ts;
    ex.y_true = fraud ? 1 : 0;
    ex.y_observed = ex.y_true;
    ex.features = {
        FeatureValue::categorical(card.number),
        FeatureValue::categorical(merchant),
        FeatureValue::categorical(kCategories[cat].name),
        FeatureValue::categorical(card.first),
        FeatureValue::categorical(card.last),
        FeatureValue::categorical(card.gender),
        FeatureValue::categorical(city.name),
        FeatureValue::categorical(kStates[city.state]),
        FeatureValue::categorical(city.zip),
        FeatureValue::categorical(card.job),
        FeatureValue::numeric(amt),
        FeatureValue::numeric(city.lat),
        FeatureValue::numeric(city.lon),
        FeatureValue::numeric(city.population),
        FeatureValue::numeric(std::floor(card.age)),
        FeatureValue::numeric(hour),
    };
    examples.push_back(std::move(ex));
  }
  return Dataset(schema, std::move(examples));
}

}  // namespace noisyfpr::synthetic

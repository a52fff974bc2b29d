#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "noisyfpr/error.hpp"
#include "noisyfpr/learner.hpp"
#include "noisyfpr/metrics.hpp"
#include "noisyfpr/rng.hpp"
#include "support.hpp"

using namespace noisyfpr;

namespace {

GbdtConfig small_cfg(int rounds = 50) {
  GbdtConfig cfg;
  cfg.n_rounds = rounds;
  cfg.max_depth = 3;
  return cfg;
}

Dataset one_feature_threshold(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto k = static_cast<int>(rng.below(40)) - 20;
    const double x = (k >= 0 ? k + 1 : k) / 20.0;
    const Label y = x > 0 ? 1 : 0;
    rows.push_back(fixtures::numeric_example(static_cast<ExampleId>(i), {x}, y, y));
  }
  return Dataset(fixtures::numeric_schema(1), std::move(rows));
}

Dataset categorical_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const FeatureSchema schema({{"cat", FeatureKind::categorical}, {"amt", FeatureKind::numeric}}, "y", "ts");
  std::vector<Example> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = rng.below(4);
    const double amt = rng.normal();
    const Label y = (c == 3 || (c == 2 && amt > 0.5)) ? 1 : 0;
    Example ex;
    ex.id = static_cast<ExampleId>(i);
    ex.y_true = ex.y_observed = y;
    ex.features = {FeatureValue::categorical("c" + std::to_string(c)),
                   i % 7 == 0 ? FeatureValue::missing(FeatureKind::numeric) : FeatureValue::numeric(amt)};
    rows.push_back(std::move(ex));
  }
  return Dataset(schema, std::move(rows));
}

}  // namespace

TEST(Train, SeparableOneFeatureHasTrainingAucOne) {
  const auto ds = one_feature_threshold(200, 1);
  const auto model = train(ds, LabelSource::truth, small_cfg());
  const auto s = model.scores(ds);
  EXPECT_EQ(fixtures::pairwise_auc(s, fixtures::true_labels(ds)), 1.0);
  double min_pos = 1.0, max_neg = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds[i].y_true ? min_pos : max_neg) = ds[i].y_true ? std::min(min_pos, s[i]) : std::max(max_neg, s[i]);
  }
  EXPECT_GT(min_pos, max_neg);
}

TEST(Train, SingleClassIsDegenerateLaplacePrior) {
  std::vector<Example> rows;
  for (int i = 0; i < 8; ++i) rows.push_back(fixtures::numeric_example(i, {double(i)}, 0, 0));
  const Dataset ds(fixtures::numeric_schema(1), rows);
  const auto model = train(ds, LabelSource::truth, small_cfg());
  EXPECT_TRUE(model.degenerate());
  EXPECT_TRUE(model.trees().empty());
  for (double s : model.scores(ds)) EXPECT_DOUBLE_EQ(s, 1.0 / 10.0);
}

TEST(Train, DeterministicBitIdentical) {
  const auto ds = categorical_data(400, 2);
  GbdtConfig cfg = small_cfg(30);
  cfg.subsample = 0.7;
  cfg.seed = 99;
  const auto a = train(ds, LabelSource::truth, cfg);
  const auto b = train(ds, LabelSource::truth, cfg);
  EXPECT_EQ(a.scores(ds), b.scores(ds));
  EXPECT_TRUE(a == b);
}

TEST(Train, LossNonIncreasingEveryRound) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto ds = categorical_data(500, seed);
    GbdtConfig cfg = small_cfg(60);
    cfg.learning_rate = 1.0;
    cfg.subsample = 0.5;
    const auto r = train_with_trace(ds, LabelSource::truth, cfg);
    ASSERT_EQ(r.loss_per_round.size(), 60u);
    double prev = r.initial_loss;
    for (double l : r.loss_per_round) {
      EXPECT_LE(l, prev);
      prev = l;
    }
  }
}

TEST(Train, PermutationInvariant) {
  const auto ds = categorical_data(300, 4);
  std::vector<Example> rows = ds.examples();
  std::reverse(rows.begin(), rows.end());
  Rng rng(5);
  rng.shuffle(std::span<Example>(rows));
  const Dataset permuted(ds.schema(), rows);
  for (int rounds : {1, 20}) {
    GbdtConfig cfg = small_cfg(rounds);
    cfg.max_depth = rounds == 1 ? 1 : 4;
    const auto a = train(ds, LabelSource::truth, cfg);
    const auto b = train(permuted, LabelSource::truth, cfg);
    for (const auto& ex : ds.examples()) EXPECT_EQ(a.score(ex), b.score(ex));
  }
}

TEST(Train, HeldOutAucOnSeparableData) {
  const auto train_ds = fixtures::separable(2000, 5, 10);
  const auto test_ds = fixtures::separable(2000, 5, 11);
  const auto model = train(train_ds, LabelSource::truth, GbdtConfig{});
  const auto s = model.scores(test_ds);
  EXPECT_GE(fixtures::pairwise_auc(s, fixtures::true_labels(test_ds)), 0.99);
}

TEST(Train, UsesRequestedLabels) {
  auto rows = one_feature_threshold(200, 6).examples();
  for (auto& ex : rows) ex.y_observed = 0;
  const Dataset ds(fixtures::numeric_schema(1), rows);
  EXPECT_TRUE(train(ds, LabelSource::observed, small_cfg()).degenerate());
  EXPECT_FALSE(train(ds, LabelSource::truth, small_cfg()).degenerate());
}

TEST(Predict, ScoresBoundedAndOrdered) {
  const auto ds = categorical_data(300, 7);
  const auto model = train(ds, LabelSource::truth, small_cfg());
  const auto out = predict(model, ds);
  ASSERT_EQ(out.size(), ds.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].id, ds[i].id);
    EXPECT_TRUE(std::isfinite(out[i].score));
    EXPECT_GE(out[i].score, 0.0);
    EXPECT_LE(out[i].score, 1.0);
  }
}

TEST(Predict, UnseenCategoryUsesPrior) {
  const auto ds = categorical_data(300, 8);
  const auto model = train(ds, LabelSource::truth, small_cfg());
  Example unseen = ds[0];
  unseen.features[0] = FeatureValue::categorical("never-seen");
  const auto x = model.encode(Dataset(ds.schema(), {unseen}));
  EXPECT_DOUBLE_EQ(x.values[0], ds.fraud_rate());
}

TEST(Predict, SchemaMismatch) {
  const auto model = train(one_feature_threshold(50, 1), LabelSource::truth, small_cfg(5));
  EXPECT_THROW(predict(model, fixtures::separable(10, 2, 1)), std::invalid_argument);
  const FeatureSchema cat({{"x0", FeatureKind::categorical}}, "label", "ts");
  Example ex;
  ex.features = {FeatureValue::categorical("a")};
  EXPECT_THROW(predict(model, Dataset(cat, {ex})), std::invalid_argument);
}

TEST(Serialize, JsonRoundTripBitIdentical) {
  const auto ds = categorical_data(400, 9);
  const auto model = train(ds, LabelSource::truth, small_cfg(40));
  const auto back = Model::from_json(nlohmann::json::parse(model.to_json().dump()));
  EXPECT_TRUE(back == model);
  EXPECT_EQ(back.scores(ds), model.scores(ds));
  auto j = model.to_json();
  j["version"] = 99;
  EXPECT_THROW(Model::from_json(j), std::exception);
}

TEST(Config, JsonAndValidation) {
  GbdtConfig cfg;
  cfg.n_rounds = 7;
  cfg.seed = 3;
  EXPECT_EQ(GbdtConfig::from_json(cfg.to_json()), cfg);
  EXPECT_EQ(GbdtConfig::micro_defaults().n_rounds, 100);
  EXPECT_EQ(GbdtConfig::from_json(nlohmann::json::object(), GbdtConfig::micro_defaults()).n_rounds, 100);
  EXPECT_THROW(GbdtConfig::from_json({{"n_rounds", 0}}), ConfigError);
  EXPECT_THROW(GbdtConfig::from_json({{"learning_rate", "fast"}}), ConfigError);
}

TEST(MicroModels, SlicesSeedsAndDegenerateMembers) {
  const auto ds = categorical_data(500, 10);
  const GbdtConfig cfg = small_cfg(10);
  const auto a = train_micromodels(ds, 5, cfg, 42);
  const auto b = train_micromodels(ds, 5, cfg, 42);
  ASSERT_EQ(a.size(), 5u);
  const auto probe = categorical_data(50, 11);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a[i].scores(probe), b[i].scores(probe));

  const auto slices = slice_shuffled(ds, 5, derive_seed(42, "slices"));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(slices[i].size(), 100u);
    GbdtConfig member = cfg;
    member.seed = derive_seed(42, "member/" + std::to_string(i));
    EXPECT_EQ(train(slices[i], LabelSource::observed, member).scores(probe), a[i].scores(probe));
  }

  auto rows = one_feature_threshold(40, 12).examples();
  for (auto& ex : rows) ex.y_observed = 0;
  rows[0].y_observed = rows[0].y_true = 1;
  const auto members = train_micromodels(Dataset(fixtures::numeric_schema(1), rows), 4, cfg, 1);
  std::size_t degenerate = 0;
  for (const auto& m : members) degenerate += m.degenerate();
  EXPECT_GE(degenerate, 3u);
  EXPECT_THROW(train_micromodels(Dataset(fixtures::numeric_schema(1), {rows[0], rows[1]}), 4, cfg, 1),
               std::invalid_argument);
}

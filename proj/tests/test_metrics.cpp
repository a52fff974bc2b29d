#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "noisyfpr/metrics.hpp"
#include "noisyfpr/rng.hpp"
#include "noisyfpr/theory.hpp"
#include "support.hpp"

using namespace noisyfpr;

TEST(Threshold, TenNegatives) {
  std::vector<double> s;
  for (int i = 1; i <= 10; ++i) s.push_back(i / 10.0);
  const auto sc = fixtures::scored(s, std::vector<Label>(10, 0), std::vector<Label>(10, 0));
  const auto r = threshold_for_fpr(sc, LabelSelector::truth(), 0.10);
  EXPECT_DOUBLE_EQ(r.achieved_fpr, 0.1);
  EXPECT_DOUBLE_EQ(r.threshold, 0.9);
  EXPECT_DOUBLE_EQ(rate_at_threshold(sc, r.threshold, LabelSelector::truth(), 0), 0.1);
}

TEST(Threshold, HighTargetTwoNegatives) {
  const auto sc = fixtures::scored({0.2, 0.7}, {0, 0}, {0, 0});
  const auto r = threshold_for_fpr(sc, LabelSelector::truth(), 0.999);
  EXPECT_DOUBLE_EQ(r.achieved_fpr, 0.5);
  EXPECT_DOUBLE_EQ(r.threshold, 0.2);
}

TEST(Threshold, AllScoresEqual) {
  const auto sc = fixtures::scored({0.4, 0.4, 0.4}, {0, 0, 1}, {0, 0, 1});
  const auto r = threshold_for_fpr(sc, LabelSelector::truth(), 0.3);
  EXPECT_DOUBLE_EQ(r.achieved_fpr, 0.0);
  EXPECT_DOUBLE_EQ(r.threshold, 0.4);
}

TEST(Threshold, OracleAgreesOnRandomData) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s;
    std::vector<Label> y;
    const int n = 5 + static_cast<int>(rng.below(60));
    for (int i = 0; i < n; ++i) {
      s.push_back(std::round(rng.uniform() * 20) / 20);
      y.push_back(i == 0 ? 0 : rng.bernoulli(0.3));
    }
    const auto sc = fixtures::scored(s, y, y);
    const double target = 0.01 + 0.5 * rng.uniform();
    const auto r = threshold_for_fpr(sc, LabelSelector::truth(), target);
    // Oracle: scan every candidate threshold (observed scores), keep the smallest feasible.
    double best_t = std::numeric_limits<double>::infinity();
    double best_fpr = -1.0;
    for (double t : s) {
      const double f = rate_at_threshold(sc, t, LabelSelector::truth(), 0);
      if (f <= target && t < best_t) {
        best_t = t;
        best_fpr = f;
      }
    }
    EXPECT_LE(r.achieved_fpr, target);
    EXPECT_DOUBLE_EQ(r.achieved_fpr, best_fpr);
    // Only negative scores are candidates, so the chosen t may sit above a tied positive-only score.
    EXPECT_DOUBLE_EQ(rate_at_threshold(sc, r.threshold, LabelSelector::truth(), 0), best_fpr);
  }
}

TEST(Threshold, Errors) {
  const auto sc = fixtures::scored({0.4}, {1}, {1});
  EXPECT_THROW(threshold_for_fpr(sc, LabelSelector::truth(), 0.1), std::invalid_argument);
  EXPECT_THROW(threshold_for_fpr(fixtures::scored({0.4}, {0}, {0}), LabelSelector::truth(), 0.0),
               std::invalid_argument);
}

TEST(Rate, Examples) {
  const auto sc = fixtures::scored({0.9, 0.1}, {1, 0}, {1, 0});
  EXPECT_DOUBLE_EQ(rate_at_threshold(sc, 0.5, LabelSelector::truth(), 0), 0.0);
  EXPECT_DOUBLE_EQ(rate_at_threshold(sc, 0.5, LabelSelector::truth(), 1), 1.0);
  const auto three = fixtures::scored({0.9, 0.6, 0.1}, {0, 0, 0}, {0, 0, 0});
  const auto none = clean_none(observed_view(three));
  EXPECT_DOUBLE_EQ(rate_at_threshold(three, 0.5, LabelSelector::cleaned(none), 0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rate_at_threshold(three, -std::numeric_limits<double>::infinity(), LabelSelector::observed(), 0),
                   1.0);
  EXPECT_DOUBLE_EQ(rate_at_threshold(three, 0.9, LabelSelector::observed(), 0), 0.0);
  EXPECT_THROW(rate_at_threshold(three, 0.5, LabelSelector::observed(), 1), std::invalid_argument);
}

TEST(Roc, MonotoneAndAucMatchesPairwiseOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    std::vector<Label> y;
    for (int i = 0; i < 80; ++i) {
      y.push_back(i < 2 ? static_cast<Label>(i) : rng.bernoulli(0.3));
      s.push_back(std::round((rng.uniform() + 0.3 * y.back()) * 10) / 10);
    }
    const auto sc = fixtures::scored(s, y, y);
    const auto roc = roc_curve(sc, LabelSelector::truth());
    EXPECT_EQ(roc.front().fpr, 1.0);
    EXPECT_EQ(roc.back().fpr, 0.0);
    EXPECT_EQ(roc.back().tpr, 0.0);
    for (std::size_t i = 1; i < roc.size(); ++i) {
      EXPECT_LT(roc[i - 1].threshold, roc[i].threshold);
      EXPECT_LE(roc[i].fpr, roc[i - 1].fpr);
      EXPECT_LE(roc[i].tpr, roc[i - 1].tpr);
    }
    EXPECT_NEAR(auc(s, y), fixtures::pairwise_auc(s, y), 1e-12);
  }
}

TEST(Evaluate, CleanEqualsTruthGivesZeroError) {
  const auto sc = fixtures::scored({0.9, 0.6, 0.4, 0.2}, {1, 0, 1, 0}, {1, 0, 1, 0});
  const auto r = evaluate_method(sc, clean_none(observed_view(sc)), 0.5, 0.1);
  EXPECT_DOUBLE_EQ(r.fpr_estimate, r.fpr_actual);
  EXPECT_DOUBLE_EQ(r.relative_error, 0.0);
  EXPECT_DOUBLE_EQ(r.delta_fpr, 0.0);
}

TEST(Evaluate, SignedAndAbsoluteError) {
  // Hidden fraud at 0.6 inflates the apparent FPR.
  const auto sc = fixtures::scored({0.9, 0.6, 0.4, 0.2}, {1, 1, 0, 0}, {1, 0, 0, 0});
  const auto r = evaluate_method(sc, clean_none(observed_view(sc)), 0.5, 0.25);
  EXPECT_DOUBLE_EQ(r.fpr_actual, 0.0);
  EXPECT_DOUBLE_EQ(r.fpr_estimate, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.delta_fpr, -1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.signed_relative_error, -4.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.relative_error, 4.0 / 3.0);
  EXPECT_EQ(MetricsReport::from_json(r.to_json()).relative_error, r.relative_error);
}

TEST(Evaluate, DeltaMatchesIdentityForCalibratedAssignments) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = theory::random_calibrated_world(rng, 40);
    std::vector<ScoredExample> sc;
    CleaningAssignment a;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const auto& p = w.points()[i];
      sc.push_back({static_cast<ExampleId>(i), p.score, p.y_true, p.y_observed});
      a.labels.push_back({static_cast<ExampleId>(i), p.y_observed, w.cleaned()[i], std::nullopt});
    }
    for (double t : w.distinct_scores()) {
      const auto r = evaluate_method(sc, a, t, 0.05);
      const auto id = theory::check_proposition_fpr_exact(w, t);
      EXPECT_NEAR(r.delta_fpr, id.lhs, 1e-12);
      EXPECT_NEAR(r.delta_fpr, id.rhs, 1e-12);
    }
  }
}

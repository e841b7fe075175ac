// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mrv/metrics.hpp"
#include "mrv/rng.hpp"

using namespace mrv;

namespace {

// Mann-Whitney pairwise-ranking AUC: fraction of (positive, negative) pairs
// ranked correctly, half credit for ties.
double auc_pairwise(const std::vector<double>& scores, const std::vector<bool>& truths) {
  double credit = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!truths[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (truths[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        credit += 1.0;
      else if (scores[i] == scores[j])
        credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

}  // namespace

TEST(Confusion, BasicTally) {
  auto c = confusion({0.9, 0.2}, {true, false}, 0.5);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.tn, 1u);
  EXPECT_EQ(c.fp, 0u);
  EXPECT_EQ(c.fn, 0u);
}

TEST(Confusion, AllBelowThreshold) {
  auto c = confusion({0.1, 0.2, 0.3}, {true, false, true}, 0.9);
  EXPECT_EQ(c.tp, 0u);
  EXPECT_EQ(c.fp, 0u);
  EXPECT_EQ(c.fn, 2u);
  EXPECT_EQ(c.tn, 1u);
}

TEST(Confusion, ScoreEqualToThresholdIsNegativeDetection) {
  auto c = confusion({0.5}, {true}, 0.5);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.tp, 0u);
}

TEST(Confusion, Errors) {
  EXPECT_THROW(confusion({0.5}, {true, false}, 0.1), Error);
  EXPECT_THROW(confusion({}, {}, 0.1), Error);
}

TEST(Rates, Arithmetic) {
  auto r = rates(ConfusionCounts{9, 1, 1, 9});
  EXPECT_DOUBLE_EQ(r.ppv, 0.9);
  EXPECT_DOUBLE_EQ(r.tpr, 0.9);
  EXPECT_DOUBLE_EQ(r.fpr, 0.1);
  EXPECT_DOUBLE_EQ(r.acc, 0.9);
}

TEST(Rates, UndefinedPpv) {
  try {
    rates(ConfusionCounts{0, 5, 0, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UndefinedRate);
  }
}

TEST(Rates, ReportedBenchmarkRowReconstructs) {
  // 500-sample test split with tp=225 fn=25 fp=9 tn=241
  auto r = rates(ConfusionCounts{225, 25, 9, 241});
  EXPECT_NEAR(r.ppv, 0.9615, 5e-5);
  EXPECT_NEAR(r.tpr, 0.9000, 5e-5);
  EXPECT_NEAR(r.fpr, 0.0360, 5e-5);
  EXPECT_NEAR(r.acc, 0.9320, 5e-5);
}

TEST(Sweep, ExtremesOfTheGrid) {
  std::vector<double> scores{0.4, 0.6, 0.7, 0.2};
  std::vector<bool> truths{true, true, false, false};
  auto curve = sweep(scores, truths, {0.0, 1.0});
  ASSERT_EQ(curve.points.size(), 2u);
  EXPECT_DOUBLE_EQ(curve.points[0].fpr, 1.0);  // everything detected positive
  EXPECT_DOUBLE_EQ(curve.points[0].tpr, 1.0);
  EXPECT_DOUBLE_EQ(curve.points[1].fpr, 0.0);  // nothing detected
  EXPECT_DOUBLE_EQ(curve.points[1].tpr, 0.0);
}

TEST(Sweep, TwoScoreFixtureByHand) {
  std::vector<double> scores{0.8, 0.3};
  std::vector<bool> truths{true, false};
  auto curve = sweep(scores, truths, {0.1, 0.55, 0.9});
  ASSERT_EQ(curve.points.size(), 3u);
  // t=0.1: both positive -> tpr 1, fpr 1, acc 0.5
  EXPECT_DOUBLE_EQ(curve.points[0].tpr, 1.0);
  EXPECT_DOUBLE_EQ(curve.points[0].fpr, 1.0);
  EXPECT_DOUBLE_EQ(curve.points[0].acc, 0.5);
  // t=0.55: separated -> tpr 1, fpr 0, acc 1
  EXPECT_DOUBLE_EQ(curve.points[1].tpr, 1.0);
  EXPECT_DOUBLE_EQ(curve.points[1].fpr, 0.0);
  EXPECT_DOUBLE_EQ(curve.points[1].acc, 1.0);
  // t=0.9: none detected -> tpr 0, fpr 0, acc 0.5
  EXPECT_DOUBLE_EQ(curve.points[2].tpr, 0.0);
  EXPECT_DOUBLE_EQ(curve.points[2].fpr, 0.0);
  EXPECT_DOUBLE_EQ(curve.points[2].acc, 0.5);
}

TEST(Auc, PerfectSeparation) {
  std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
  std::vector<bool> truths{true, true, false, false};
  EXPECT_NEAR(auc(sweep(scores, truths)), 1.0, 1e-12);
}

TEST(Auc, IdenticalScoresIsChance) {
  std::vector<double> scores{0.5, 0.5, 0.5, 0.5};
  std::vector<bool> truths{true, false, true, false};
  EXPECT_NEAR(auc(sweep(scores, truths)), 0.5, 1e-12);
}

TEST(Auc, SmallFixtureMatchesPairwiseOracle) {
  std::vector<double> scores{0.9, 0.4, 0.6, 0.1};
  std::vector<bool> truths{true, true, false, false};
  double expect = auc_pairwise(scores, truths);
  EXPECT_NEAR(expect, 0.75, 1e-12);  // 3 of 4 pairs ranked correctly
  EXPECT_NEAR(auc(sweep(scores, truths)), expect, 1e-12);
}

TEST(Auc, MatchesPairwiseOracleOnRandomSets) {
  Rng rng(41);
  for (int it = 0; it < 25; ++it) {
    size_t n = 2 + rng.below(200);
    std::vector<double> scores(n);
    std::vector<bool> truths(n);
    bool has_pos = false, has_neg = false;
    for (size_t i = 0; i < n; ++i) {
      // quantized scores force plenty of ties
      scores[i] = std::floor(rng.next_double() * 20.0) / 20.0;
      truths[i] = rng.chance(0.5);
      (truths[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    EXPECT_NEAR(auc(sweep(scores, truths)), auc_pairwise(scores, truths), 1e-9);
  }
}

TEST(Auc, TooFewPoints) {
  RocCurve c;
  c.points.push_back(RocPoint{0.5, 0.1, 0.9, 0.9});
  EXPECT_THROW(auc(c), Error);
}

TEST(Auc, InvariantUnderMonotoneScoreTransform) {
  Rng rng(42);
  std::vector<double> scores(64);
  std::vector<bool> truths(64);
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.next_double();
    truths[i] = rng.chance(0.4);
  }
  std::vector<double> mapped(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) mapped[i] = std::exp(3.0 * scores[i]) - 1.0;
  EXPECT_NEAR(auc(sweep(scores, truths)), auc(sweep(mapped, truths)), 1e-9);
}

TEST(BestThreshold, SeparableFixtureReturnsSmallestWinningGridPoint) {
  std::vector<double> scores{0.8, 0.7, 0.3, 0.2};
  std::vector<bool> truths{true, true, false, false};
  auto curve = sweep(scores, truths);
  auto [t, acc] = best_threshold(curve);
  EXPECT_DOUBLE_EQ(acc, 1.0);
  EXPECT_GT(t, 0.3);
  EXPECT_LT(t, 0.7);
  // ties resolve to the smallest threshold achieving max acc
  for (const auto& p : curve.points) {
    if (p.acc == acc) {
      EXPECT_LE(t, p.threshold);
      break;
    }
  }
}

TEST(BestThreshold, DegenerateScoresFallBackToPrior) {
  std::vector<double> scores{0.5, 0.5, 0.5, 0.5, 0.5};
  std::vector<bool> truths{true, false, false, false, false};
  auto [t, acc] = best_threshold(sweep(scores, truths));
  EXPECT_DOUBLE_EQ(acc, 0.8);  // majority class prior
  (void)t;
}

TEST(Sweep, RatesMonotoneAlongTheGrid) {
  Rng rng(43);
  std::vector<double> scores(80);
  std::vector<bool> truths(80);
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.next_double();
    truths[i] = rng.chance(0.5);
  }
  auto curve = sweep(scores, truths);
  for (size_t i = 0; i + 1 < curve.points.size(); ++i) {
    EXPECT_LE(curve.points[i].threshold, curve.points[i + 1].threshold);
    EXPECT_GE(curve.points[i].fpr + 1e-12, curve.points[i + 1].fpr);
    EXPECT_GE(curve.points[i].tpr + 1e-12, curve.points[i + 1].tpr);
  }
}

TEST(DefaultGrid, ContainsMidpointsAndEndpoints) {
  std::vector<double> scores{0.2, 0.4, 0.9};
  auto grid = default_grid(scores);
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
  EXPECT_LT(grid.front(), 0.2);
  EXPECT_GT(grid.back(), 0.9);
  auto has = [&](double v) {
    return std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(g - v) < 1e-15; });
  };
  EXPECT_TRUE(has(0.3));
  EXPECT_TRUE(has(0.65));
}

TEST(DefaultGrid, ToleratesInfiniteScores) {
  std::vector<double> scores{1.0, 2.0, std::numeric_limits<double>::infinity()};
  auto grid = default_grid(scores);
  for (double g : grid) EXPECT_TRUE(std::isfinite(g));
}

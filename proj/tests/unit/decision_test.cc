/*
 * Copyright 2026 The Replica Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "decision.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "error.h"
#include "test_util.h"

namespace replica {
namespace {

TEST(UnitUtility, BuiltInKinds) {
  Unit unit;
  unit.label = 1;
  EXPECT_EQ(UnitUtility(UtilitySpec::BinaryError(-2, -1), 0, unit), -2.0);
  EXPECT_EQ(UnitUtility(UtilitySpec::Agreement(), 1, unit), 1.0);
  unit.label = 0;
  EXPECT_EQ(UnitUtility(UtilitySpec::AlertIndicator(), 1, unit), 1.0);
}

TEST(UtilitySpec, RejectsInvalid) {
  EXPECT_THROW(UtilitySpec::BinaryError(0, 0), Error);
  EXPECT_THROW(UtilitySpec::BinaryError(1, -1), Error);
  EXPECT_THROW(UtilitySpec::Table({{{0, 0}, 1.0}}, 2), Error);
}

// Expected utility of acting 1 vs 0 on a calibrated score p, argmaxed over a
// 1001-point grid of thresholds.
double GridArgmax(double u01, double u10) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(20000);
  for (auto& v : p) v = u(rng);
  double best = -1e300;
  double arg = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    double total = 0.0;
    for (double s : p) total += s >= t ? u10 * (1 - s) : u01 * s;
    if (total > best) {
      best = total;
      arg = t;
    }
  }
  return arg;
}

TEST(OptimalThresholdClosedForm, MatchesGridOracle) {
  const Prevalence prev = Prevalence::Make(0.3, Prevalence::Source::kUserSpecified);
  EXPECT_DOUBLE_EQ(OptimalThresholdClosedForm(UtilitySpec::BinaryError(-1, -1), prev).threshold, 0.5);
  const double t1 = OptimalThresholdClosedForm(UtilitySpec::BinaryError(-3, -1), prev).threshold;
  const double t2 = OptimalThresholdClosedForm(UtilitySpec::BinaryError(-1, -3), prev).threshold;
  EXPECT_DOUBLE_EQ(t1, 0.25);
  EXPECT_DOUBLE_EQ(t2, 0.75);
  EXPECT_NEAR(GridArgmax(-3, -1), t1, 0.02);
  EXPECT_NEAR(GridArgmax(-1, -3), t2, 0.02);
}

TEST(OptimalThresholdClosedForm, MonotoneInMissCost) {
  const Prevalence prev = Prevalence::Make(0.5, Prevalence::Source::kUserSpecified);
  double last = 1.0;
  for (double c01 = 0.1; c01 < 10.0; c01 += 0.1) {
    const double t = OptimalThresholdClosedForm(UtilitySpec::BinaryError(-c01, -1), prev).threshold;
    EXPECT_LE(t, last);
    last = t;
  }
}

TEST(OptimalThresholdClosedForm, PerStudyPrevalenceAddsNote) {
  const Prevalence prev = Prevalence::Make(0.5, Prevalence::Source::kEmpiricalPerStudy, 0);
  EXPECT_FALSE(OptimalThresholdClosedForm(UtilitySpec::BinaryError(-1, -1), prev).note.empty());
}

TEST(OptimalThresholdEmpirical, SpecExamples) {
  std::vector<ScoredLabel> pts = {{0.1, 0}, {0.4, 0}, {0.6, 1}, {0.9, 1}};
  EXPECT_DOUBLE_EQ(OptimalThresholdEmpirical(pts, UtilitySpec::Agreement()), 0.5);
  std::vector<ScoredLabel> positives = {{0.2, 1}, {0.5, 1}, {0.9, 1}};
  EXPECT_EQ(OptimalThresholdEmpirical(positives, UtilitySpec::BinaryError(-1, -1)), -kInf);
  std::vector<ScoredLabel> one = {{0.7, 1}};
  EXPECT_EQ(OptimalThresholdEmpirical(one, UtilitySpec::Agreement()), -kInf);
}

double Achieved(const std::vector<ScoredLabel>& pts, double t, const UtilitySpec& u) {
  double total = 0.0;
  for (const auto& p : pts) total += u.Value(p.score >= t ? 1 : 0, p.label);
  return total / static_cast<double>(pts.size());
}

TEST(OptimalThresholdEmpirical, AffineInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<ScoredLabel> pts;
    for (int i = 0; i < 25; ++i) {
      pts.push_back({std::round(u(rng) * 10) / 10, u(rng) < 0.5 ? 1 : 0});
    }
    const UtilitySpec base = UtilitySpec::BinaryError(-1 - 3 * u(rng), -1 - 3 * u(rng));
    const double t = OptimalThresholdEmpirical(pts, base);
    const double t2 = OptimalThresholdEmpirical(pts, base.Affine(2.5, 7.0, 2));
    // Different thresholds may tie; the achieved utility must agree.
    EXPECT_NEAR(Achieved(pts, t, base), Achieved(pts, t2, base), 1e-12);
  }
}

TEST(CandidateThresholds, MidpointsAndInfinities) {
  std::vector<ScoredLabel> pts = {{0.3, 0}, {0.1, 1}, {0.3, 1}};
  const std::vector<double> c = CandidateThresholds(pts);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.front(), -kInf);
  EXPECT_DOUBLE_EQ(c[1], 0.2);
  EXPECT_EQ(c.back(), kInf);
}

TEST(ApplyRule, ThresholdAndIdentity) {
  const Study s = testing::ScoreStudy("s", {0.2, 0.5, 0.8}, {0, 0, 0});
  EXPECT_EQ(ApplyRule(DecisionRule::Threshold(0.5), s), (std::vector<Label>{0, 1, 1}));
  EXPECT_EQ(ApplyRule(DecisionRule::Threshold(-kInf), s), (std::vector<Label>{1, 1, 1}));
  EXPECT_EQ(ApplyRule(DecisionRule::Threshold(kInf), s), (std::vector<Label>{0, 0, 0}));
  const Study p = testing::PairStudy("p", {{1, 0}, {0, 0}});
  EXPECT_EQ(ApplyRule(DecisionRule::Identity(), p), (std::vector<Label>{1, 0}));
  EXPECT_THROW(ApplyRule(DecisionRule::Threshold(0.5), p), Error);
}

}  // namespace
}  // namespace replica

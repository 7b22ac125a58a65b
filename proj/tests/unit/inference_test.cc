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


#include "inference.h"

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>

#include "error.h"
#include "simgen.h"
#include "test_util.h"

namespace replica {
namespace {

const DecisionRule kHalf = DecisionRule::Threshold(0.5);

StudyCollection Simulated(std::vector<StudySpec> specs, std::uint64_t seed) {
  return Generate({std::move(specs), seed});
}

StudySpec Spec(const std::string& id, int n, double flip = 0.0) {
  StudySpec s;
  s.id = id;
  s.n = n;
  s.concept_flip = flip;
  return s;
}

ResamplePlan Plan(ResamplePlan::Scheme scheme, int replicates, std::uint64_t seed,
                  double gamma = 0.0) {
  ResamplePlan p;
  p.scheme = scheme;
  p.replicates = replicates;
  p.seed = seed;
  p.gamma = gamma;
  return p;
}

TEST(BootstrapWithin, IdenticalUnitsHaveZeroVariance) {
  const StudyCollection c(testing::PredictionSchema(), {testing::CountStudy("s", 0, 0, 0, 9)});
  const WithinBootstrapResult r =
      BootstrapWithin(c, DecisionRule::Identity(), UtilitySpec::Agreement(),
                      Plan(ResamplePlan::Scheme::kWithinStudy, 200, 3));
  EXPECT_EQ(r.studies[0].variance, 0.0);
  EXPECT_EQ(r.studies[0].ci_low, 1.0);
}

TEST(BootstrapWithin, SingleUnitIsFlagged) {
  const StudyCollection c(testing::PredictionSchema(),
                          {testing::CountStudy("s", 1, 0, 0, 0), testing::CountStudy("t", 1, 1, 0, 0)});
  const WithinBootstrapResult r =
      BootstrapWithin(c, DecisionRule::Identity(), UtilitySpec::Agreement(),
                      Plan(ResamplePlan::Scheme::kWithinStudy, 50, 3));
  EXPECT_TRUE(r.studies[0].degenerate);
  EXPECT_EQ(r.studies[0].variance, 0.0);
  EXPECT_FALSE(r.studies[1].degenerate);
  EXPECT_EQ(r.difference_variance[0][1], r.studies[0].variance + r.studies[1].variance);
}

TEST(BootstrapWithin, DeterministicAndShrinking) {
  double last = 0.0;
  for (int n : {100, 1000, 10000}) {
    const StudyCollection c = Simulated({Spec("s", n)}, 42);
    const ResamplePlan plan = Plan(ResamplePlan::Scheme::kWithinStudy, 400, 7);
    const auto a = BootstrapWithin(c, kHalf, UtilitySpec::Agreement(), plan);
    const auto b = BootstrapWithin(c, kHalf, UtilitySpec::Agreement(), plan);
    EXPECT_EQ(a.studies[0].draws, b.studies[0].draws);
    const double v = a.studies[0].variance;
    if (last > 0.0) {
      EXPECT_GT(last / v, 5.0);
      EXPECT_LT(last / v, 20.0);
    }
    last = v;
  }
}

TEST(ClusterBootstrap, SeedDeterministic) {
  const Study s = testing::CountStudy("a", 3, 2, 1, 4);
  Study t = s;
  t.id = "b";
  const StudyCollection c(testing::PredictionSchema(), {s, t});
  const GroupStatistic stat(c, DecisionRule::Identity(), UtilitySpec::Agreement(),
                            Statistic::kMaxAbsDiff);
  const auto d = ClusterBootstrap(stat, Plan(ResamplePlan::Scheme::kCluster, 100, 1));
  EXPECT_EQ(d.observed, 0.0);
  EXPECT_EQ(d.statistics.size(), 100u);
  const auto again = ClusterBootstrap(stat, Plan(ResamplePlan::Scheme::kCluster, 100, 1));
  EXPECT_EQ(d.statistics, again.statistics);
}

TEST(ClusterBootstrap, ConstantStudiesGiveZeroEverywhere) {
  const StudyCollection c(testing::PredictionSchema(),
                          {testing::CountStudy("a", 4, 0, 0, 0), testing::CountStudy("b", 6, 0, 0, 0)});
  const GroupStatistic stat(c, DecisionRule::Identity(), UtilitySpec::Agreement(),
                            Statistic::kMaxAbsDiff);
  for (double s : ClusterBootstrap(stat, Plan(ResamplePlan::Scheme::kCluster, 50, 2)).statistics) {
    EXPECT_EQ(s, 0.0);
  }
}

TEST(ClusterBootstrap, NeedsTwoStudies) {
  const StudyCollection c(testing::PredictionSchema(), {testing::CountStudy("a", 4, 1, 0, 0)});
  const GroupStatistic stat(c, DecisionRule::Identity(), UtilitySpec::Agreement(),
                            Statistic::kMaxAbsDiff);
  EXPECT_THROW(ClusterBootstrap(stat, Plan(ResamplePlan::Scheme::kCluster, 5, 2)), Error);
}

// Draws whose study stage picks one study K times carry only unit noise and
// should sit below the observed gap between well-separated studies.
TEST(ClusterBootstrap, SameStudyDrawsBelowObserved) {
  StudySpec a = Spec("a", 400);
  StudySpec b = Spec("b", 400, 0.6);
  const StudyCollection c = Simulated({a, b}, 99);
  const GroupStatistic stat(c, kHalf, UtilitySpec::Agreement(), Statistic::kMaxAbsDiff);
  const double observed = stat.Evaluate(stat.studies());
  Engine engine = SubstreamEngine(5, 0);
  int below = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto& units = stat.studies()[UniformIndex(engine, 2)];
    GroupStatistic::Groups g(2);
    for (auto& group : g) {
      for (std::size_t i = 0; i < units.size(); ++i) {
        group.push_back(units[UniformIndex(engine, units.size())]);
      }
    }
    below += stat.Evaluate(g) < observed ? 1 : 0;
  }
  EXPECT_GT(below, 0.9 * trials);
}

TEST(StudyStrap, MixtureComposition) {
  // Disjoint score supports: study a below 0.5, study b above.
  std::vector<double> lo, hi;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    lo.push_back(0.001 * i);
    hi.push_back(0.6 + 0.001 * i);
    labels.push_back(i % 2);
  }
  const StudyCollection c(testing::ScoreSchema(),
                          {testing::ScoreStudy("a", lo, labels), testing::ScoreStudy("b", hi, labels)});
  const double gamma = 0.5;
  const auto pseudo = StudyStrap(c, Plan(ResamplePlan::Scheme::kStudyStrap, 400, 12, gamma));
  double share = 0.0;
  for (const auto& p : pseudo) {
    for (const auto& u : p.study(0).units) share += *u.score > 0.5 ? 1 : 0;
  }
  share /= 400.0 * 100.0;
  EXPECT_NEAR(share, gamma * 0.5, 0.03);
}

TEST(EpsilonRate, SpecExamples) {
  EXPECT_EQ(EpsilonRate({0, 0, 0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(EpsilonRate({0.1, 0.2, 0.3}, 0.15), 1.0 / 3.0);
  EXPECT_EQ(EpsilonRate({0.1, 0.2, 0.3}, 0.05), 0.0);
  const std::vector<double> s = {0.3, 0.1, 0.5, 0.2};
  double last = 0.0;
  for (double e = 0.0; e < 0.6; e += 0.01) {
    EXPECT_GE(EpsilonRate(s, e), last);
    last = EpsilonRate(s, e);
  }
}

TEST(PermutationTest, IdenticalMultisetsGivePOne) {
  const Study s = testing::CountStudy("a", 3, 2, 1, 4);
  Study t = s;
  t.id = "b";
  std::reverse(t.units.begin(), t.units.end());
  const StudyCollection c(testing::PredictionSchema(), {s, t});
  const GroupStatistic stat(c, DecisionRule::Identity(), UtilitySpec::Agreement(),
                            Statistic::kMaxAbsDiff);
  const TestResult r = PermutationTest(stat, 99, 5, Adjustment::kNone);
  EXPECT_EQ(r.statistic_observed, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(PermutationTest, PValueConventionAndDeterminism) {
  const StudyCollection c = Simulated({Spec("a", 60), Spec("b", 60, 0.5), Spec("c", 60)}, 3);
  const GroupStatistic stat(c, kHalf, UtilitySpec::Agreement(), Statistic::kMaxAbsDiff);
  const TestResult r = PermutationTest(stat, 199, 77, Adjustment::kBonferroni);
  int exceed = 0;
  for (double d : r.null_draws) {
    exceed += d >= r.statistic_observed - 1e-12 * std::max(1.0, r.statistic_observed) ? 1 : 0;
  }
  EXPECT_DOUBLE_EQ(r.p_value, (1.0 + exceed) / 200.0);
  EXPECT_GT(r.p_value, 0.0);
  const TestResult again = PermutationTest(stat, 199, 77, Adjustment::kBonferroni);
  EXPECT_EQ(r.null_draws, again.null_draws);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      EXPECT_DOUBLE_EQ(r.pairwise_p_adjusted[i][j], std::min(1.0, 3.0 * r.pairwise_p[i][j]));
    }
  }
  const TestResult one = PermutationTest(stat, 1, 77, Adjustment::kNone);
  EXPECT_TRUE(one.p_value == 0.5 || one.p_value == 1.0);
}

TEST(PermutationTest, RelabelingStudiesKeepsObserved) {
  const StudyCollection c = Simulated({Spec("a", 50), Spec("b", 50, 0.5)}, 8);
  const StudyCollection swapped(c.schema(), {c.study(1), c.study(0)});
  const GroupStatistic s1(c, kHalf, UtilitySpec::Agreement(), Statistic::kMaxAbsDiff);
  const GroupStatistic s2(swapped, kHalf, UtilitySpec::Agreement(), Statistic::kMaxAbsDiff);
  EXPECT_EQ(s1.Evaluate(s1.studies()), s2.Evaluate(s2.studies()));
}

TEST(PermutationTest, RelativeStatisticNeedsPositiveUtilities) {
  const StudyCollection c = Simulated({Spec("a", 30), Spec("b", 30)}, 8);
  const GroupStatistic stat(c, kHalf, UtilitySpec::BinaryError(-1, -1),
                            Statistic::kMaxRelativeDiff);
  EXPECT_THROW(PermutationTest(stat, 9, 1, Adjustment::kNone), Error);
}

TEST(Quantile, Type7) {
  EXPECT_DOUBLE_EQ(Quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
}

}  // namespace
}  // namespace replica

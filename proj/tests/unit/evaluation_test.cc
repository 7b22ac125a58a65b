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


#include "evaluation.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "error.h"
#include "test_util.h"

namespace replica {
namespace {

using testing::CountStudy;
using testing::PairStudy;

const DecisionRule kIdentity = DecisionRule::Identity();

TEST(AverageUtility, SpecExamples) {
  const Study s = PairStudy("s", {{1, 1}, {0, 0}, {0, 1}, {1, 0}});
  EXPECT_DOUBLE_EQ(AverageUtility(s, kIdentity, UtilitySpec::BinaryError(-2, -1)), -0.75);
  EXPECT_DOUBLE_EQ(AverageUtility(CountStudy("c", 3, 0, 0, 4), kIdentity,
                                  UtilitySpec::Agreement()),
                   1.0);
  EXPECT_DOUBLE_EQ(AverageUtility(PairStudy("a", {{1, 0}, {1, 1}, {0, 0}, {0, 1}}),
                                  kIdentity, UtilitySpec::AlertIndicator()),
                   0.5);
}

TEST(AverageUtilityFromFrequencies, SpecExamples) {
  EXPECT_DOUBLE_EQ(AverageUtilityFromFrequencies({0.25, 0.25, 0.25, 0.25}, -2, -1), -0.75);
  EXPECT_EQ(AverageUtilityFromFrequencies({0.5, 0, 0, 0.5}, -7, -3), 0.0);
  EXPECT_NEAR(AverageUtilityFromFrequencies({0.5, 0.1, 0.1, 0.3}, -1, -1), -0.2, 1e-15);
}

TEST(ConfusionFrequencies, Orientation) {
  const ConfusionFrequencies f = ComputeConfusionFrequencies(
      PairStudy("s", {{1, 1}, {0, 0}, {0, 1}, {1, 0}}), kIdentity);
  EXPECT_EQ(f.f00, 0.25);
  EXPECT_EQ(f.f01, 0.25);
  EXPECT_EQ(f.f10, 0.25);
  EXPECT_EQ(f.f11, 0.25);
  const ConfusionFrequencies zeros = ComputeConfusionFrequencies(CountStudy("z", 4, 0, 0, 0), kIdentity);
  EXPECT_EQ(zeros.f00, 1.0);
  const ConfusionFrequencies alerts = ComputeConfusionFrequencies(CountStudy("a", 0, 0, 3, 0), kIdentity);
  EXPECT_EQ(alerts.f10, 1.0);
  EXPECT_EQ(alerts.f00 + alerts.f01 + alerts.f11, 0.0);
}

TEST(SensSpecPrev, SpecExamples) {
  const SensSpecPrev r = ComputeSensSpecPrev({0.5, 0.1, 0.1, 0.3});
  EXPECT_NEAR(r.sensitivity, 0.75, 1e-15);
  EXPECT_NEAR(r.specificity, 0.5 / 0.6, 1e-15);
  EXPECT_NEAR(r.prevalence, 0.4, 1e-15);
  const SensSpecPrev perfect = ComputeSensSpecPrev({0.5, 0, 0, 0.5});
  EXPECT_EQ(perfect.sensitivity, 1.0);
  EXPECT_EQ(perfect.specificity, 1.0);
  EXPECT_THROW(ComputeSensSpecPrev({1, 0, 0, 0}), Error);
}

TEST(SensSpecPrev, ReconstructsUtility) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> count(1, 20);
  std::uniform_real_distribution<double> cost(-5.0, 0.0);
  for (int rep = 0; rep < 200; ++rep) {
    const ConfusionFrequencies f = ComputeConfusionFrequencies(
        CountStudy("s", count(rng), count(rng), count(rng), count(rng)), kIdentity);
    const double u01 = cost(rng), u10 = cost(rng);
    const SensSpecPrev r = ComputeSensSpecPrev(f);
    const double rebuilt = u01 * (1 - r.sensitivity) * r.prevalence +
                           u10 * (1 - r.specificity) * (1 - r.prevalence);
    EXPECT_NEAR(rebuilt, AverageUtilityFromFrequencies(f, u01, u10), 1e-12);
  }
}

TEST(UtilityMatrix, EntriesAndAntisymmetry) {
  const UtilityMatrix m = ComputeUtilityMatrix({{"a", "b"}, {-0.5, -0.7}});
  EXPECT_EQ(m.entries[0][0], 0.0);
  EXPECT_NEAR(m.entries[0][1], 0.2, 1e-15);
  EXPECT_NEAR(m.entries[1][0], -0.2, 1e-15);
  const UtilityMatrix one = ComputeUtilityMatrix({{"a"}, {3.0}});
  ASSERT_EQ(one.entries.size(), 1u);
  EXPECT_EQ(one.entries[0][0], 0.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  UtilityVector v;
  for (int k = 0; k < 6; ++k) {
    v.study_ids.push_back("s" + std::to_string(k));
    v.values.push_back(z(rng));
  }
  const UtilityMatrix r = ComputeUtilityMatrix(v);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) EXPECT_EQ(r.entries[i][j], -r.entries[j][i]);
  }
}

TEST(UtilityVector, IdenticalStudiesGiveZeroMatrix) {
  const Study s = CountStudy("a", 3, 1, 2, 4);
  Study t = s;
  t.id = "b";
  const StudyCollection c(testing::PredictionSchema(), {s, t});
  const UtilityMatrix m = ComputeUtilityMatrix(
      ComputeUtilityVector(c, kIdentity, UtilitySpec::BinaryError(-1, -2)));
  EXPECT_EQ(m.entries[0][1], 0.0);
}

TEST(AverageUtility, OrderInvariantAndCopyInvariant) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    Study s = testing::RandomStudy("s", 37, rng);
    const UtilitySpec u = UtilitySpec::BinaryError(-1.3, -0.7);
    const double base = AverageUtility(s, kIdentity, u);
    Study shuffled = s;
    std::shuffle(shuffled.units.begin(), shuffled.units.end(), rng);
    EXPECT_EQ(AverageUtility(shuffled, kIdentity, u), base);
    for (int b = 1; b <= 3; ++b) {
      EXPECT_EQ(AverageUtility(testing::Collate(s, b, "c"), kIdentity, u), base);
    }
  }
}

TEST(EmpiricalJoint, DiscreteMatchesConfusion) {
  const Study s = CountStudy("s", 5, 1, 1, 3);
  const auto joint = std::get<DiscreteJoint>(
      ComputeEmpiricalJoint(s, testing::PredictionSchema(), JointSelector::Rule(kIdentity)));
  EXPECT_EQ(joint.Frequency({0, 0, ""}), 0.5);
  EXPECT_EQ(joint.Frequency({0, 1, ""}), 0.1);
  EXPECT_EQ(joint.Frequency({1, 0, ""}), 0.1);
  EXPECT_EQ(joint.Frequency({1, 1, ""}), 0.3);
}

TEST(EmpiricalJoint, ScoredPoints) {
  const Study s = testing::ScoreStudy("s", {0.2, 0.8}, {0, 1});
  const auto joint = std::get<ScoredJoint>(
      ComputeEmpiricalJoint(s, testing::ScoreSchema(), JointSelector::Score()));
  ASSERT_EQ(joint.weights.size(), 2u);
  EXPECT_EQ(joint.weights.at({0.2, 0}), 0.5);
  EXPECT_EQ(joint.weights.at({0.8, 1}), 0.5);
}

TEST(EmpiricalJoint, CopiesAreIdentical) {
  std::mt19937_64 rng(4);
  const Study s = testing::RandomStudy("s", 23, rng);
  const Schema schema = testing::BothSchema();
  for (const JointSelector sel : {JointSelector::Rule(kIdentity), JointSelector::Score()}) {
    const EmpiricalJoint one = ComputeEmpiricalJoint(s, schema, sel);
    EXPECT_EQ(ComputeEmpiricalJoint(testing::Collate(s, 2, "c"), schema, sel), one);
  }
}

TEST(EmpiricalJoint, MissingFieldIsError) {
  const Study s = CountStudy("s", 1, 1, 1, 1);
  EXPECT_THROW(ComputeEmpiricalJoint(s, testing::PredictionSchema(), JointSelector::Score()),
               Error);
}

}  // namespace
}  // namespace replica

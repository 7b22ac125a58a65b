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


#include "replicability.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "error.h"
#include "inference.h"
#include "test_util.h"

namespace replica {
namespace {

UtilityVector Vec(std::vector<double> values) {
  UtilityVector v;
  for (std::size_t k = 0; k < values.size(); ++k) {
    v.study_ids.push_back("s" + std::to_string(k + 1));
  }
  v.values = std::move(values);
  return v;
}

TEST(AbsoluteEpsilon, SpecExamples) {
  const Verdict v = AbsoluteEpsilon(Vec({-0.75, -0.75, -0.70}), 0.05);
  EXPECT_NEAR(v.achieved, 0.05, 1e-15);
  EXPECT_TRUE(v.replicable);
  EXPECT_TRUE(AbsoluteEpsilon(Vec({0.3, 0.3, 0.3}), 0.0).replicable);
  const Verdict w = AbsoluteEpsilon(Vec({0, 1}), 0.5);
  EXPECT_FALSE(w.replicable);
  EXPECT_EQ(w.achieved, 1.0);
  EXPECT_EQ(w.worst_pair, std::make_pair(std::string("s1"), std::string("s2")));
  const Verdict single = AbsoluteEpsilon(Vec({-4}), 0.0);
  EXPECT_EQ(single.achieved, 0.0);
  EXPECT_TRUE(single.replicable);
  EXPECT_THROW(AbsoluteEpsilon(Vec({0, 1}), -0.1), Error);
}

TEST(RelativeEpsilon, SpecExamples) {
  const Verdict v = RelativeEpsilon(Vec({2.0, 2.2}), 0.1);
  EXPECT_NEAR(v.achieved, 2 * 0.2 / 4.2, 1e-12);
  EXPECT_TRUE(v.replicable);
  EXPECT_EQ(RelativeEpsilon(Vec({1.5, 1.5}), 0.0).achieved, 0.0);
  EXPECT_NO_THROW(RelativeEpsilon(Vec({-1, 3}), 1.0));
  try {
    RelativeEpsilon(Vec({-3, 1}), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(Dominance, SpecExamples) {
  EXPECT_EQ(Dominance(Vec({-0.5, -0.6}), Vec({-0.7, -0.9})).relation, Relation::kDominates);
  EXPECT_EQ(Dominance(Vec({-0.7, -0.9}), Vec({-0.5, -0.6})).relation, Relation::kDominatedBy);
  EXPECT_EQ(Dominance(Vec({0.2, 0.4}), Vec({0.2, 0.4})).relation, Relation::kEqual);
  EXPECT_EQ(Dominance(Vec({0.9, 0.1}), Vec({0.5, 0.5})).relation, Relation::kIncomparable);
  UtilityVector other = Vec({1, 2});
  other.study_ids[1] = "x";
  EXPECT_THROW(Dominance(Vec({1, 2}), other), Error);
}

TEST(ClassifyRegion, SpecExamples) {
  EXPECT_EQ(ClassifyRegion({0.6, 0.5}, {0.7, 0.65}), Region::kB);
  EXPECT_EQ(ClassifyRegion({0.6, 0.5}, {0.8, 0.55}), Region::kC);
  EXPECT_EQ(ClassifyRegion({0.6, 0.5}, {0.6, 0.5}), Region::kB);
  EXPECT_EQ(ClassifyRegion({0.6, 0.5}, {0.5, 0.45}), Region::kA);
  EXPECT_EQ(ClassifyRegion({0.6, 0.5}, {0.7, 0.4}), Region::kOther);
}

DiscreteJoint J(double a, double b, double c, double d) {
  return MakeBinaryJoint({a, b, c, d});
}

TEST(TotalVariation, SpecExamples) {
  EXPECT_NEAR(TotalVariationDistance(J(0.5, 0.1, 0.1, 0.3), J(0.3, 0.1, 0.1, 0.5)), 0.2, 1e-15);
  EXPECT_EQ(TotalVariationDistance(J(0.5, 0.1, 0.1, 0.3), J(0.5, 0.1, 0.1, 0.3)), 0.0);
  EXPECT_EQ(TotalVariationDistance(J(1, 0, 0, 0), J(0, 0, 0, 1)), 1.0);
}

ScoredJoint Points(std::vector<std::tuple<double, int, double>> pts) {
  ScoredJoint j;
  for (auto [s, y, w] : pts) j.weights[{s, y}] += w;
  return j;
}

TEST(KolmogorovSmirnov, SpecExamples) {
  const ScoredJoint f = Points({{0.2, 0, 0.5}, {0.8, 1, 0.5}});
  EXPECT_EQ(KolmogorovSmirnovJointDistance(f, f), 0.0);
  EXPECT_EQ(KolmogorovSmirnovJointDistance(Points({{0, 0, 1}}), Points({{1, 0, 1}})), 1.0);
  EXPECT_DOUBLE_EQ(
      KolmogorovSmirnovJointDistance(f, Points({{0.2, 0, 0.5}, {0.2, 1, 0.5}})), 0.5);
  EXPECT_THROW(KolmogorovSmirnovJointDistance(ScoredJoint{}, f), Error);
}

TEST(DistanceEpsilon, CounterexampleAndCopies) {
  const Schema schema = testing::PredictionSchema();
  const DecisionRule id = DecisionRule::Identity();
  const StudyCollection pair(schema, {testing::CountStudy("a", 5, 1, 1, 3),
                                      testing::CountStudy("b", 3, 1, 1, 5)});
  const Verdict v = DistanceEpsilon(pair, DistanceBackend::kTotalVariation, id, 0.1);
  EXPECT_FALSE(v.replicable);
  EXPECT_NEAR(v.achieved, 0.2, 1e-12);

  const Study s = testing::CountStudy("a", 2, 3, 1, 4);
  const StudyCollection copies(schema, {s, testing::Collate(s, 2, "b")});
  const Verdict c = DistanceEpsilon(copies, DistanceBackend::kTotalVariation, id, 0.0);
  EXPECT_EQ(c.achieved, 0.0);
  EXPECT_TRUE(c.replicable);

  const StudyCollection one(schema, {s});
  EXPECT_EQ(DistanceEpsilon(one, DistanceBackend::kTotalVariation, id, 0.0).achieved, 0.0);
}

TEST(UtilityPseudoDistance, SpecExamples) {
  const UtilitySpec u = UtilitySpec::BinaryError(-1, -1);
  const DecisionRule id = DecisionRule::Identity();
  EXPECT_NEAR(UtilityPseudoDistance(J(0.5, 0.1, 0.1, 0.3), J(0.3, 0.1, 0.1, 0.5), u, id), 0.0, 1e-12);
  EXPECT_EQ(UtilityPseudoDistance(J(0.5, 0.1, 0.1, 0.3), J(0.5, 0.1, 0.1, 0.3), u, id), 0.0);
  EXPECT_NEAR(UtilityPseudoDistance(J(0.5, 0, 0, 0.5), J(0.5, 0.5, 0, 0), u, id), 0.5, 1e-15);
}

TEST(BenchmarkCompare, SpecExamples) {
  const DecisionRule id = DecisionRule::Identity();
  const Study s = testing::PairStudy("s", {{1, 1}, {0, 0}, {0, 1}, {1, 0}});
  const BenchmarkSummary b = BenchmarkCompare(s, id, UtilitySpec::BinaryError(-2, -1), -0.70);
  EXPECT_NEAR(b.gap, -0.05, 1e-15);
  EXPECT_EQ(b.per_unit, (std::vector<double>{0, 0, -2, -1}));
  EXPECT_EQ(BenchmarkCompare(s, id, UtilitySpec::BinaryError(-2, -1), -0.75).gap, 0.0);
  EXPECT_EQ(BenchmarkCompare(testing::CountStudy("p", 2, 0, 0, 2), id,
                             UtilitySpec::Agreement(), 1.0).gap,
            0.0);
}

// A constant rule collapses the joint onto the label marginal, so with equal
// marginals every study has the same discrete joint.
TEST(Coarsening, ConstantRuleNeverIncreasesDistance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Study> studies;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> scores;
      std::vector<int> labels;
      for (int i = 0; i < 20; ++i) {
        scores.push_back(u(rng));
        labels.push_back(i < 8 ? 1 : 0);
      }
      studies.push_back(testing::ScoreStudy("s" + std::to_string(k), scores, labels));
    }
    const StudyCollection c(testing::ScoreSchema(), studies);
    const double fine = MaxOffDiagonal(DistanceTable(
        StudyJoints(c, DistanceBackend::kTotalVariation, DecisionRule::Threshold(0.5))));
    const double coarse = MaxOffDiagonal(DistanceTable(
        StudyJoints(c, DistanceBackend::kTotalVariation, DecisionRule::Threshold(-kInf))));
    EXPECT_LE(coarse, fine);
    EXPECT_EQ(coarse, 0.0);
  }
}

TEST(Verdicts, InvariantToStudyOrder) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 100; ++rep) {
    UtilityVector v = Vec({z(rng), z(rng), z(rng), z(rng)});
    UtilityVector r = v;
    std::reverse(r.values.begin(), r.values.end());
    std::reverse(r.study_ids.begin(), r.study_ids.end());
    EXPECT_EQ(AbsoluteEpsilon(v, 0.5).achieved, AbsoluteEpsilon(r, 0.5).achieved);
  }
}

}  // namespace
}  // namespace replica

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


#include "commands.h"

#include <gtest/gtest.h>

#include "error.h"
#include "test_util.h"

namespace replica {
namespace {

using testing::TempDir;

std::string Csv(int c00, int c01, int c10, int c11) {
  std::string out = "prediction,label\n";
  for (int i = 0; i < c00; ++i) out += "0,0\n";
  for (int i = 0; i < c01; ++i) out += "0,1\n";
  for (int i = 0; i < c10; ++i) out += "1,0\n";
  for (int i = 0; i < c11; ++i) out += "1,1\n";
  return out;
}

Json CounterexampleConfig(const TempDir& dir) {
  dir.Write("a.csv", Csv(5, 1, 1, 3));
  dir.Write("b.csv", Csv(3, 1, 1, 5));
  return Json::parse(R"({
    "seed": 11,
    "studies": [{"id": "a", "path": "a.csv"}, {"id": "b", "path": "b.csv"}],
    "columns": {"label": "label", "predicted_class": "prediction"},
    "utility": {"kind": "binary_error", "u01": -1, "u10": -1},
    "rule": {"kind": "identity"},
    "definitions": [{"kind": "absolute", "epsilon": 0.01}],
    "test": {"permutations": 49}
  })");
}

TEST(ParseConfig, OverridesAndErrors) {
  TempDir dir;
  Json raw = CounterexampleConfig(dir);
  ApplyOverride(raw, "test.permutations", "7");
  ApplyOverride(raw, "epsilon", "0.3");
  ApplyOverride(raw, "benchmark.study", "a");
  const AssessmentConfig c = ParseConfig(raw, dir.path());
  EXPECT_EQ(c.test.permutations, 7);
  EXPECT_EQ(c.definitions[0].epsilon, 0.3);
  EXPECT_EQ(*c.benchmark.study, "a");

  Json bad = raw;
  bad["definitions"][0]["epsilon"] = -1;
  EXPECT_THROW(ParseConfig(bad, dir.path()), Error);
  bad = raw;
  bad["utility"] = {{"kind", "binary_error"}, {"u01", 0}, {"u10", 0}};
  EXPECT_THROW(ParseConfig(bad, dir.path()), Error);
  bad = raw;
  bad["rule"] = {{"kind", "sometimes"}};
  EXPECT_THROW(ParseConfig(bad, dir.path()), Error);
}

TEST(RunAssess, CounterexampleVerdicts) {
  TempDir dir;
  Json raw = CounterexampleConfig(dir);
  Report r = RunAssess(ParseConfig(raw, dir.path()));
  EXPECT_EQ(r.outcome, 0);
  raw["definitions"] = Json::parse(R"([{"kind": "distance", "epsilon": 0.1}])");
  r = RunAssess(ParseConfig(raw, dir.path()));
  EXPECT_EQ(r.outcome, 1);
  EXPECT_NEAR(r.body["verdicts"][0]["achieved"].get<double>(), 0.2, 1e-12);
  EXPECT_TRUE(r.files.count("utilities.csv"));
  EXPECT_TRUE(r.files.count("distances.csv"));
}

TEST(RunAssess, MissingLabelColumnIsSchemaError) {
  TempDir dir;
  Json raw = CounterexampleConfig(dir);
  raw["columns"]["label"] = "outcome";
  try {
    RunAssess(ParseConfig(raw, dir.path()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("outcome"), std::string::npos);
  }
}

TEST(RunAssess, RestrictionAndAlternativeRule) {
  TempDir dir;
  dir.Write("a.csv", "age,score,label\n30,0.2,0\n60,0.7,1\n70,0.4,1\n");
  dir.Write("b.csv", "age,score,label\n65,0.9,1\n20,0.1,0\n");
  const Json raw = Json::parse(R"({
    "studies": [{"id": "a", "path": "a.csv"}, {"id": "b", "path": "b.csv"}],
    "features": [{"name": "age", "type": "numeric"}],
    "restrict": [{"feature": "age", "op": ">=", "value": 50}],
    "utility": {"kind": "agreement"},
    "rule": {"kind": "threshold", "threshold": 0.5},
    "alternative_rule": {"kind": "threshold", "threshold": 0.3},
    "definitions": [{"kind": "absolute", "epsilon": 0.6}]
  })");
  const Report r = RunAssess(ParseConfig(raw, dir.path()));
  EXPECT_EQ(r.body["collection"]["studies"][0]["n"], 2);
  EXPECT_EQ(r.body["collection"]["studies"][1]["n"], 1);
  EXPECT_EQ(r.body["comparison"]["region"]["label"], "B");
  EXPECT_EQ(r.outcome, 0);
}

TEST(RunTest, SinglePermutation) {
  TempDir dir;
  Json raw = CounterexampleConfig(dir);
  raw["test"]["permutations"] = 1;
  const Report r = RunTest(ParseConfig(raw, dir.path()));
  const double p = r.body["test"]["p_value"].get<double>();
  EXPECT_TRUE(p == 0.5 || p == 1.0);
}

TEST(RunBenchmark, GapZeroAtOwnUtility) {
  TempDir dir;
  Json raw = CounterexampleConfig(dir);
  raw["benchmark"] = {{"study", "b"}, {"u0", -0.2}};
  const Report r = RunBenchmark(ParseConfig(raw, dir.path()));
  EXPECT_EQ(r.body["benchmark"]["gap"].get<double>(), 0.0);
  raw["benchmark"].erase("study");
  try {
    RunBenchmark(ParseConfig(raw, dir.path()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(Report, CanonicalBodyIsReproducible) {
  TempDir dir;
  Json raw = CounterexampleConfig(dir);
  raw["resample"] = {{"scheme", "cluster_bootstrap"}, {"replicates", 30}};
  const AssessmentConfig c = ParseConfig(raw, dir.path());
  for (auto run : {RunAssess, RunTest, RunResample}) {
    const Report a = run(c);
    const Report b = run(c);
    EXPECT_EQ(a.CanonicalJson(), b.CanonicalJson());
    EXPECT_EQ(a.CanonicalHash(), b.CanonicalHash());
    EXPECT_EQ(a.CanonicalHash().size(), 64u);
  }
}

TEST(RunSimulate, ManifestFeedsAssess) {
  TempDir dir;
  const Json raw = Json::parse(R"({
    "seed": 5,
    "simulate": {"studies": [{"id": "x", "n": 300}, {"id": "y", "n": 300}]},
    "utility": {"kind": "agreement"},
    "rule": {"kind": "threshold", "threshold": 0.5},
    "definitions": [{"kind": "absolute", "epsilon": 0.2}],
    "test": {"permutations": 99}
  })");
  const Report sim = RunSimulate(ParseConfig(raw, dir.path()));
  WriteReport(sim, dir.path());
  const AssessmentConfig c =
      ParseConfig(ReadConfigJson(dir.path() / "manifest.json"), dir.path());
  EXPECT_EQ(RunAssess(c).outcome, 0);
  EXPECT_GT(RunTest(c).body["test"]["p_value"].get<double>(), 0.01);
}

TEST(FormatReal, SeventeenDigits) {
  EXPECT_EQ(FormatReal(0.1), "0.10000000000000001");
  EXPECT_EQ(FormatReal(-kInf), "-inf");
}

}  // namespace
}  // namespace replica

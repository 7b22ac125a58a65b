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

// The declarative assessment config: one JSON file naming the study files,
// column bindings, utility, rule, requested definitions and inference plans.
// Relative study paths resolve against the config file's directory.

#ifndef REPLICA_CONFIG_H_
#define REPLICA_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "decision.h"
#include "inference.h"
#include "json.hpp"
#include "replicability.h"
#include "simgen.h"
#include "studyset.h"

namespace replica {

using Json = nlohmann::ordered_json;

struct RuleConfig {
  enum class Kind { kIdentity, kThreshold, kOptimalClosedForm, kOptimalEmpirical };

  Kind kind = Kind::kThreshold;
  double threshold = 0.5;
};

struct PrevalenceConfig {
  Prevalence::Source source = Prevalence::Source::kEmpiricalPooled;
  std::optional<double> value;     // user_specified only
  std::optional<std::string> study;  // empirical_per_study only
};

struct DefinitionRequest {
  Definition definition = Definition::kAbsolute;
  double epsilon = 0.0;
  DistanceBackend backend = DistanceBackend::kTotalVariation;
};

struct ResampleConfig {
  ResamplePlan plan;
  Statistic statistic = Statistic::kMaxAbsDiff;
  std::optional<double> epsilon;
  double level = 0.95;
  bool emit_statistics = false;
};

struct TestConfig {
  Statistic statistic = Statistic::kMaxAbsDiff;
  int permutations = 999;
  Adjustment adjust = Adjustment::kNone;
  double alpha = 0.05;
  bool emit_null_draws = false;
};

struct BenchmarkConfig {
  std::optional<double> u0;
  std::optional<std::string> study;
  std::optional<double> epsilon;
};

struct AssessmentConfig {
  Json raw;  // the config as read, with overrides applied
  std::filesystem::path base_dir;
  LoadConfig load;
  std::optional<SubsetPredicate> restrict;
  UtilitySpec utility = UtilitySpec::Agreement();
  RuleConfig rule;
  std::optional<RuleConfig> alternative_rule;
  PrevalenceConfig prevalence;
  std::vector<DefinitionRequest> definitions;
  DistanceBackend distance_backend = DistanceBackend::kTotalVariation;
  ResampleConfig resample;
  TestConfig test;
  BenchmarkConfig benchmark;
  std::optional<CollectionSpec> simulate;
  std::uint64_t seed = 0;
};

// Throws kParse for malformed JSON and kInvalidArgument for bad values.
AssessmentConfig ParseConfig(const Json& raw, const std::filesystem::path& base_dir);

Json ReadConfigJson(const std::filesystem::path& path);

// Sets a dotted path ("test.permutations") to a value; the text is parsed
// as a JSON literal when possible and kept as a string otherwise. The key
// "epsilon" sets every epsilon in the config at once.
void ApplyOverride(Json& raw, const std::string& key, const std::string& value);

CollectionSpec ParseCollectionSpec(const Json& simulate, std::uint64_t seed);

std::string RuleKindName(RuleConfig::Kind kind);

}  // namespace replica

#endif  // REPLICA_CONFIG_H_

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

#include <cmath>

#include "error.h"

namespace replica {

CellCounts CountCells(const Study& study, const DecisionRule& rule,
                      int num_labels) {
  if (rule.kind == DecisionRule::Kind::kThreshold && num_labels != 2) {
    Fail(ErrorCode::kPrecondition, "threshold rules need a binary label set");
  }
  CellCounts cells;
  cells.num_labels = num_labels;
  cells.n = static_cast<long long>(study.size());
  cells.counts.assign(static_cast<std::size_t>(num_labels * num_labels), 0);
  for (const auto& unit : study.units) {
    const Label action = ApplyRule(rule, unit);
    if (unit.label < 0 || unit.label >= num_labels || action < 0 ||
        action >= num_labels) {
      Fail(ErrorCode::kPrecondition, "study '" + study.id +
                                         "': label or action outside the "
                                         "declared label set");
    }
    ++cells.counts[static_cast<std::size_t>(action * num_labels + unit.label)];
  }
  return cells;
}

double AverageUtility(const Study& study, const DecisionRule& rule,
                      const UtilitySpec& utility, int num_labels) {
  const CellCounts cells = CountCells(study, rule, num_labels);
  return UtilityFromCounts(utility, cells.counts, num_labels, cells.n);
}

ConfusionFrequencies ToConfusionFrequencies(const CellCounts& cells) {
  if (cells.num_labels != 2) {
    Fail(ErrorCode::kPrecondition, "confusion frequencies need binary labels");
  }
  const double n = static_cast<double>(cells.n);
  return {static_cast<double>(cells.at(0, 0)) / n,
          static_cast<double>(cells.at(0, 1)) / n,
          static_cast<double>(cells.at(1, 0)) / n,
          static_cast<double>(cells.at(1, 1)) / n};
}

ConfusionFrequencies ComputeConfusionFrequencies(const Study& study,
                                                 const DecisionRule& rule) {
  for (const auto& unit : study.units) {
    if (unit.label != 0 && unit.label != 1) {
      Fail(ErrorCode::kPrecondition, "confusion frequencies need binary labels");
    }
  }
  return ToConfusionFrequencies(CountCells(study, rule, 2));
}

double AverageUtilityFromFrequencies(const ConfusionFrequencies& freqs,
                                     double u01, double u10) {
  return u01 * freqs.f01 + u10 * freqs.f10;
}

SensSpecPrev ComputeSensSpecPrev(const ConfusionFrequencies& freqs) {
  const double positives = freqs.f01 + freqs.f11;
  const double negatives = freqs.f00 + freqs.f10;
  if (!(positives > 0.0)) {
    Fail(ErrorCode::kPrecondition, "prevalence 0: sensitivity undefined");
  }
  if (!(negatives > 0.0)) {
    Fail(ErrorCode::kPrecondition, "prevalence 1: specificity undefined");
  }
  return {freqs.f11 / positives, freqs.f00 / negatives, positives};
}

UtilityVector ComputeUtilityVector(const StudyCollection& collection,
                                   const DecisionRule& rule,
                                   const UtilitySpec& utility) {
  UtilityVector vector;
  const int num_labels = collection.schema().NumLabels();
  for (const auto& study : collection.studies()) {
    vector.study_ids.push_back(study.id);
    vector.values.push_back(AverageUtility(study, rule, utility, num_labels));
  }
  return vector;
}

UtilityMatrix ComputeUtilityMatrix(const UtilityVector& vector) {
  UtilityMatrix matrix;
  matrix.study_ids = vector.study_ids;
  const std::size_t k = vector.size();
  matrix.entries.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) matrix.entries[i][j] = vector.values[i] - vector.values[j];
    }
  }
  return matrix;
}

double DiscreteJoint::Frequency(const JointCell& cell) const {
  const auto it = frequencies.find(cell);
  return it == frequencies.end() ? 0.0 : it->second;
}

DiscreteJoint MakeBinaryJoint(const ConfusionFrequencies& freqs) {
  DiscreteJoint joint;
  joint.frequencies = {{{0, 0, ""}, freqs.f00},
                       {{0, 1, ""}, freqs.f01},
                       {{1, 0, ""}, freqs.f10},
                       {{1, 1, ""}, freqs.f11}};
  return joint;
}

EmpiricalJoint ComputeEmpiricalJoint(const Study& study, const Schema& schema,
                                     const JointSelector& selector) {
  const double n = static_cast<double>(study.size());
  if (selector.kind == JointSelector::Kind::kScore) {
    std::map<std::pair<double, Label>, long long> counts;
    for (const auto& unit : study.units) {
      if (!unit.score) {
        Fail(ErrorCode::kPrecondition,
             "study '" + study.id + "': scored joint needs scores");
      }
      ++counts[{*unit.score, unit.label}];
    }
    ScoredJoint joint;
    joint.num_labels = schema.NumLabels();
    for (const auto& [key, c] : counts) {
      joint.weights.emplace(key, static_cast<double>(c) / n);
    }
    return joint;
  }

  int feature_index = -1;
  if (selector.feature) {
    feature_index = schema.FeatureIndex(*selector.feature);
    if (feature_index < 0) {
      Fail(ErrorCode::kSchema, "unknown feature '" + *selector.feature + "'");
    }
    if (schema.features[feature_index].type != FeatureType::kCategorical) {
      Fail(ErrorCode::kSchema,
           "joint feature '" + *selector.feature + "' must be categorical");
    }
  }
  std::map<JointCell, long long> counts;
  for (const auto& unit : study.units) {
    JointCell cell{ApplyRule(selector.rule, unit), unit.label, ""};
    if (feature_index >= 0) {
      const FeatureValue& v = unit.features[feature_index];
      if (IsMissing(v)) {
        Fail(ErrorCode::kSchema, "study '" + study.id +
                                     "': joint feature has missing values");
      }
      cell.feature = std::get<std::string>(v);
    }
    ++counts[cell];
  }
  DiscreteJoint joint;
  joint.num_labels = schema.NumLabels();
  joint.feature_name = selector.feature;
  for (const auto& [cell, c] : counts) {
    joint.frequencies.emplace(cell, static_cast<double>(c) / n);
  }
  return joint;
}

}  // namespace replica

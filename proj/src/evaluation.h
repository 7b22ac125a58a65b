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

// Per-study average utilities, confusion frequencies, and empirical joint
// distributions of (prediction, label).
//
// Frequencies are always exact integer counts divided once by n_k, so a
// study and any b-fold collation of it give bit-identical frequencies,
// utilities and distances.

#ifndef REPLICA_EVALUATION_H_
#define REPLICA_EVALUATION_H_

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "decision.h"
#include "studyset.h"

namespace replica {

// Action-by-label counts of one study under one rule.
struct CellCounts {
  int num_labels = 2;
  long long n = 0;
  std::vector<long long> counts;  // index action * num_labels + label

  long long at(Label action, Label label) const {
    return counts[static_cast<std::size_t>(action * num_labels + label)];
  }
};

// Threshold rules require a binary label set.
CellCounts CountCells(const Study& study, const DecisionRule& rule,
                      int num_labels = 2);

// (1/n_k) sum_i U(delta(phi(x_i)), x_i, y_i).
double AverageUtility(const Study& study, const DecisionRule& rule,
                      const UtilitySpec& utility, int num_labels = 2);

// f_ab is the share of units with action a and label b: f01 counts missed
// positives, f10 false alerts.
struct ConfusionFrequencies {
  double f00 = 0.0;
  double f01 = 0.0;
  double f10 = 0.0;
  double f11 = 0.0;
};

ConfusionFrequencies ComputeConfusionFrequencies(const Study& study,
                                                 const DecisionRule& rule);
ConfusionFrequencies ToConfusionFrequencies(const CellCounts& counts);

// u01 * f01 + u10 * f10.
double AverageUtilityFromFrequencies(const ConfusionFrequencies& freqs,
                                     double u01, double u10);

struct SensSpecPrev {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double prevalence = 0.0;
};

// Throws kPrecondition when the prevalence is 0 or 1.
SensSpecPrev ComputeSensSpecPrev(const ConfusionFrequencies& freqs);

struct UtilityVector {
  std::vector<std::string> study_ids;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// entries[k][j] = U_k - U_j.
struct UtilityMatrix {
  std::vector<std::string> study_ids;
  std::vector<std::vector<double>> entries;
};

UtilityVector ComputeUtilityVector(const StudyCollection& collection,
                                   const DecisionRule& rule,
                                   const UtilitySpec& utility);
UtilityMatrix ComputeUtilityMatrix(const UtilityVector& vector);

// ---------------------------------------------------------------------------
// Empirical joints.

struct JointCell {
  Label prediction = 0;
  Label label = 0;
  std::string feature;  // empty unless a feature was opted in

  auto operator<=>(const JointCell&) const = default;
};

// Joint of a class-valued prediction and the label (a confusion table),
// optionally crossed with one discrete feature.
struct DiscreteJoint {
  int num_labels = 2;
  std::optional<std::string> feature_name;
  std::map<JointCell, double> frequencies;

  double Frequency(const JointCell& cell) const;
  bool operator==(const DiscreteJoint&) const = default;
};

// Joint of a raw score and the label; equal (score, label) points are
// aggregated, each unit weighing 1/n_k.
struct ScoredJoint {
  int num_labels = 2;
  std::map<std::pair<double, Label>, double> weights;

  bool operator==(const ScoredJoint&) const = default;
};

using EmpiricalJoint = std::variant<DiscreteJoint, ScoredJoint>;

// Binary joint from the four cell frequencies.
DiscreteJoint MakeBinaryJoint(const ConfusionFrequencies& freqs);

struct JointSelector {
  enum class Kind { kRule, kScore };

  Kind kind = Kind::kRule;
  DecisionRule rule;
  // Discrete joints only: cross the table with this categorical feature.
  std::optional<std::string> feature;

  static JointSelector Rule(const DecisionRule& r) { return {Kind::kRule, r, {}}; }
  static JointSelector Score() { return {Kind::kScore, {}, {}}; }
};

EmpiricalJoint ComputeEmpiricalJoint(const Study& study, const Schema& schema,
                                     const JointSelector& selector);

}  // namespace replica

#endif  // REPLICA_EVALUATION_H_

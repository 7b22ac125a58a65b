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

// Utilities over (action, label) pairs and the decision rules that map a
// prediction onto an action.

#ifndef REPLICA_DECISION_H_
#define REPLICA_DECISION_H_

#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "studyset.h"

namespace replica {

class UtilitySpec {
 public:
  enum class Kind { kBinaryError, kAgreement, kTable, kAlertIndicator };

  // u01 is the payoff of a missed positive (action 0, label 1), u10 of a
  // false alert (action 1, label 0). Both must be <= 0 and not both 0.
  static UtilitySpec BinaryError(double u01, double u10);
  // 1 when the action equals the label.
  static UtilitySpec Agreement();
  // 1 when the action is the positive class (index 1), whatever the label.
  static UtilitySpec AlertIndicator();
  // Arbitrary payoffs; must cover the full num_labels x num_labels grid.
  static UtilitySpec Table(std::map<std::pair<Label, Label>, double> entries,
                           int num_labels);

  Kind kind() const { return kind_; }
  double u01() const { return u01_; }
  double u10() const { return u10_; }
  const std::string& description() const { return description_; }
  const std::map<std::pair<Label, Label>, double>& table() const {
    return table_;
  }

  // U(action, label). The built-in kinds never look at raw features.
  double Value(Label action, Label label) const;

  // U -> scale * U + shift, expressed as a table over `num_labels` labels.
  UtilitySpec Affine(double scale, double shift, int num_labels) const;

 private:
  UtilitySpec() = default;

  Kind kind_ = Kind::kAgreement;
  double u01_ = 0.0;
  double u10_ = 0.0;
  std::map<std::pair<Label, Label>, double> table_;
  std::string description_;
};

std::string UtilityKindName(UtilitySpec::Kind kind);

// U(a, x, y) for one unit.
double UnitUtility(const UtilitySpec& utility, Label action, const Unit& unit);

struct DecisionRule {
  enum class Kind { kIdentity, kThreshold };

  Kind kind = Kind::kIdentity;
  // Action 1 iff score >= threshold. May be +/- infinity.
  double threshold = 0.0;

  static DecisionRule Identity() { return {Kind::kIdentity, 0.0}; }
  static DecisionRule Threshold(double t) { return {Kind::kThreshold, t}; }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Action for a single unit. Throws kPrecondition if the unit lacks the
// field the rule reads.
Label ApplyRule(const DecisionRule& rule, const Unit& unit);

std::vector<Label> ApplyRule(const DecisionRule& rule, const Study& study);

struct Prevalence {
  enum class Source { kUserSpecified, kEmpiricalPooled, kEmpiricalPerStudy };

  double value = 0.5;
  Source source = Source::kUserSpecified;
  int study_index = -1;  // only for kEmpiricalPerStudy

  static Prevalence Make(double value, Source source, int study_index = -1);
};

struct ThresholdChoice {
  double threshold = 0.0;
  std::string note;
};

// Bayes threshold for calibrated probability scores: act iff
// score >= c10 / (c01 + c10) with c01 = -u01 and c10 = -u10.
ThresholdChoice OptimalThresholdClosedForm(const UtilitySpec& utility,
                                           const Prevalence& prevalence);

struct ScoredLabel {
  double score;
  Label label;
};

// Cut points tried by OptimalThresholdEmpirical, in increasing order:
// -inf, the midpoints of consecutive distinct scores, +inf.
std::vector<double> CandidateThresholds(std::span<const ScoredLabel> points);

// Maximizes the empirical average utility over CandidateThresholds. Ties go
// to the smallest threshold.
double OptimalThresholdEmpirical(std::span<const ScoredLabel> points,
                                 const UtilitySpec& utility);

// Average utility from an action-by-label count table (row-major, index
// action * num_labels + label) over n units: sum of U(a, y) * count / n.
// Every average utility in the library goes through this one formula so
// that equal frequency tables give bit-identical utilities.
double UtilityFromCounts(const UtilitySpec& utility,
                         std::span<const long long> counts, int num_labels,
                         long long n);

// Gathers (score, label) pairs; throws kPrecondition when a unit lacks a
// score or the input is empty.
std::vector<ScoredLabel> ScoredLabels(const Study& study);
std::vector<ScoredLabel> ScoredLabels(const StudyCollection& collection);

}  // namespace replica

#endif  // REPLICA_DECISION_H_

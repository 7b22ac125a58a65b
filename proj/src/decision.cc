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

#include <algorithm>
#include <cmath>

#include "error.h"

namespace replica {

UtilitySpec UtilitySpec::BinaryError(double u01, double u10) {
  if (!std::isfinite(u01) || !std::isfinite(u10) || u01 > 0.0 || u10 > 0.0) {
    Fail(ErrorCode::kInvalidArgument,
         "binary_error utility needs finite u01 <= 0 and u10 <= 0");
  }
  if (u01 == 0.0 && u10 == 0.0) {
    Fail(ErrorCode::kInvalidArgument,
         "binary_error utility with u01 = u10 = 0 is degenerate");
  }
  UtilitySpec spec;
  spec.kind_ = Kind::kBinaryError;
  spec.u01_ = u01;
  spec.u10_ = u10;
  spec.description_ = "binary_error";
  return spec;
}

UtilitySpec UtilitySpec::Agreement() {
  UtilitySpec spec;
  spec.kind_ = Kind::kAgreement;
  spec.description_ = "agreement";
  return spec;
}

UtilitySpec UtilitySpec::AlertIndicator() {
  UtilitySpec spec;
  spec.kind_ = Kind::kAlertIndicator;
  spec.description_ = "alert_indicator";
  return spec;
}

UtilitySpec UtilitySpec::Table(
    std::map<std::pair<Label, Label>, double> entries, int num_labels) {
  for (Label a = 0; a < num_labels; ++a) {
    for (Label y = 0; y < num_labels; ++y) {
      const auto it = entries.find({a, y});
      if (it == entries.end()) {
        Fail(ErrorCode::kInvalidArgument,
             "utility table misses entry (" + std::to_string(a) + ", " +
                 std::to_string(y) + ")");
      }
      if (!std::isfinite(it->second)) {
        Fail(ErrorCode::kInvalidArgument, "utility table entry not finite");
      }
    }
  }
  UtilitySpec spec;
  spec.kind_ = Kind::kTable;
  spec.table_ = std::move(entries);
  spec.description_ = "table";
  return spec;
}

double UtilitySpec::Value(Label action, Label label) const {
  switch (kind_) {
    case Kind::kBinaryError:
      if (action < label) return u01_;
      if (action > label) return u10_;
      return 0.0;
    case Kind::kAgreement:
      return action == label ? 1.0 : 0.0;
    case Kind::kAlertIndicator:
      return action == 1 ? 1.0 : 0.0;
    case Kind::kTable: {
      const auto it = table_.find({action, label});
      if (it == table_.end()) {
        Fail(ErrorCode::kInvalidArgument,
             "utility table lookup miss for (" + std::to_string(action) +
                 ", " + std::to_string(label) + ")");
      }
      return it->second;
    }
  }
  Fail(ErrorCode::kInternal, "unknown utility kind");
}

UtilitySpec UtilitySpec::Affine(double scale, double shift,
                                int num_labels) const {
  std::map<std::pair<Label, Label>, double> entries;
  for (Label a = 0; a < num_labels; ++a) {
    for (Label y = 0; y < num_labels; ++y) {
      entries[{a, y}] = scale * Value(a, y) + shift;
    }
  }
  return Table(std::move(entries), num_labels);
}

std::string UtilityKindName(UtilitySpec::Kind kind) {
  switch (kind) {
    case UtilitySpec::Kind::kBinaryError: return "binary_error";
    case UtilitySpec::Kind::kAgreement: return "agreement";
    case UtilitySpec::Kind::kTable: return "table";
    case UtilitySpec::Kind::kAlertIndicator: return "alert_indicator";
  }
  return "?";
}

double UnitUtility(const UtilitySpec& utility, Label action, const Unit& unit) {
  return utility.Value(action, unit.label);
}

Label ApplyRule(const DecisionRule& rule, const Unit& unit) {
  if (rule.kind == DecisionRule::Kind::kIdentity) {
    if (!unit.predicted_class) {
      Fail(ErrorCode::kPrecondition,
           "identity rule needs a predicted class on every unit");
    }
    return *unit.predicted_class;
  }
  if (!unit.score) {
    Fail(ErrorCode::kPrecondition, "threshold rule needs a score on every unit");
  }
  return *unit.score >= rule.threshold ? 1 : 0;
}

std::vector<Label> ApplyRule(const DecisionRule& rule, const Study& study) {
  std::vector<Label> actions;
  actions.reserve(study.size());
  for (const auto& unit : study.units) actions.push_back(ApplyRule(rule, unit));
  return actions;
}

Prevalence Prevalence::Make(double value, Source source, int study_index) {
  if (!(value >= 0.0 && value <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "prevalence must lie in [0, 1]");
  }
  return {value, source, study_index};
}

ThresholdChoice OptimalThresholdClosedForm(const UtilitySpec& utility,
                                           const Prevalence& prevalence) {
  if (utility.kind() != UtilitySpec::Kind::kBinaryError) {
    Fail(ErrorCode::kPrecondition,
         "closed-form threshold needs a binary_error utility");
  }
  const double miss_cost = -utility.u01();
  const double alert_cost = -utility.u10();
  if (!(miss_cost + alert_cost > 0.0)) {
    Fail(ErrorCode::kPrecondition,
         "degenerate utility: no unique optimal threshold");
  }
  ThresholdChoice choice;
  choice.threshold = alert_cost / (miss_cost + alert_cost);
  // Calibrated scores already carry the prevalence; it is reported, not used.
  if (prevalence.source == Prevalence::Source::kEmpiricalPerStudy) {
    choice.note =
        "prevalence is per-study; the threshold assumes scores calibrated "
        "to each study's own prevalence";
  }
  return choice;
}

double UtilityFromCounts(const UtilitySpec& utility,
                         std::span<const long long> counts, int num_labels,
                         long long n) {
  const double total = static_cast<double>(n);
  double value = 0.0;
  for (Label a = 0; a < num_labels; ++a) {
    for (Label y = 0; y < num_labels; ++y) {
      const long long c = counts[static_cast<std::size_t>(a * num_labels + y)];
      if (c == 0) continue;
      value += utility.Value(a, y) * (static_cast<double>(c) / total);
    }
  }
  return value;
}

std::vector<double> CandidateThresholds(std::span<const ScoredLabel> points) {
  std::vector<double> scores;
  scores.reserve(points.size());
  for (const auto& p : points) scores.push_back(p.score);
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<double> candidates = {-kInf};
  for (std::size_t i = 0; i + 1 < scores.size(); ++i) {
    double mid = scores[i] + (scores[i + 1] - scores[i]) / 2.0;
    // Adjacent doubles: the midpoint must still separate the two scores.
    if (mid <= scores[i]) mid = scores[i + 1];
    candidates.push_back(mid);
  }
  candidates.push_back(kInf);
  return candidates;
}

double OptimalThresholdEmpirical(std::span<const ScoredLabel> points,
                                 const UtilitySpec& utility) {
  if (points.empty()) {
    Fail(ErrorCode::kPrecondition, "optimal threshold needs at least one unit");
  }
  std::vector<ScoredLabel> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) {
              return a.score < b.score;
            });
  for (const auto& p : sorted) {
    if (p.label < 0 || p.label > 1) {
      Fail(ErrorCode::kPrecondition, "threshold search needs binary labels");
    }
  }
  const long long n = static_cast<long long>(sorted.size());
  // At t = -inf every unit gets action 1.
  std::vector<long long> counts(4, 0);
  for (const auto& p : sorted) ++counts[2 + p.label];

  const auto candidates = CandidateThresholds(sorted);
  double best_threshold = candidates.front();
  double best_value = UtilityFromCounts(utility, counts, 2, n);
  std::size_t i = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    // Move the next group of equal scores from action 1 to action 0.
    const double group_score = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == group_score) {
      --counts[2 + sorted[i].label];
      ++counts[sorted[i].label];
      ++i;
    }
    const double value = UtilityFromCounts(utility, counts, 2, n);
    if (value > best_value) {
      best_value = value;
      best_threshold = candidates[c];
    }
  }
  return best_threshold;
}

std::vector<ScoredLabel> ScoredLabels(const Study& study) {
  std::vector<ScoredLabel> points;
  points.reserve(study.size());
  for (const auto& unit : study.units) {
    if (!unit.score) {
      Fail(ErrorCode::kPrecondition,
           "study '" + study.id + "' has units without scores");
    }
    points.push_back({*unit.score, unit.label});
  }
  if (points.empty()) {
    Fail(ErrorCode::kPrecondition, "no scored units");
  }
  return points;
}

std::vector<ScoredLabel> ScoredLabels(const StudyCollection& collection) {
  std::vector<ScoredLabel> points;
  for (const auto& study : collection.studies()) {
    auto part = ScoredLabels(study);
    points.insert(points.end(), part.begin(), part.end());
  }
  return points;
}

}  // namespace replica

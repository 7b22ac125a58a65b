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

#include <algorithm>
#include <cmath>
#include <set>

#include "error.h"

namespace replica {
namespace {

void CheckEpsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    Fail(ErrorCode::kInvalidArgument, "epsilon must be finite and >= 0");
  }
}

bool AllLessEqual(const std::vector<double>& lhs,
                  const std::vector<double>& rhs) {
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    if (!(lhs[k] <= rhs[k])) return false;
  }
  return true;
}

}  // namespace

std::string DefinitionName(Definition d) {
  switch (d) {
    case Definition::kAbsolute: return "absolute";
    case Definition::kRelative: return "relative";
    case Definition::kDistance: return "distance";
  }
  return "?";
}

std::string BackendName(DistanceBackend b) {
  return b == DistanceBackend::kTotalVariation ? "tv" : "ks";
}

DistanceBackend ParseBackend(const std::string& name) {
  if (name == "tv") return DistanceBackend::kTotalVariation;
  if (name == "ks") return DistanceBackend::kKolmogorovSmirnov;
  Fail(ErrorCode::kInvalidArgument, "unknown distance backend '" + name + "'");
}

bool WithinEpsilon(double statistic, double epsilon) {
  return statistic <= epsilon + 1e-12 * std::max(1.0, epsilon);
}

Verdict MakeVerdict(Definition definition, double epsilon,
                    std::vector<std::string> study_ids, PairTable pairwise) {
  CheckEpsilon(epsilon);
  Verdict verdict;
  verdict.definition = definition;
  verdict.epsilon = epsilon;
  const std::size_t k = study_ids.size();
  verdict.achieved = 0.0;
  if (k > 0) verdict.worst_pair = {study_ids[0], study_ids[0]};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (pairwise[i][j] > verdict.achieved) {
        verdict.achieved = pairwise[i][j];
        verdict.worst_pair = {study_ids[i], study_ids[j]};
      }
    }
  }
  if (k > 1 && verdict.achieved == 0.0) {
    verdict.worst_pair = {study_ids[0], study_ids[1]};
  }
  verdict.replicable = WithinEpsilon(verdict.achieved, epsilon);
  verdict.study_ids = std::move(study_ids);
  verdict.pairwise = std::move(pairwise);
  return verdict;
}

PairTable AbsoluteDifferences(const UtilityVector& vector) {
  const std::size_t k = vector.size();
  PairTable table(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      table[i][j] = table[j][i] = std::fabs(vector.values[i] - vector.values[j]);
    }
  }
  return table;
}

PairTable RelativeDifferences(const UtilityVector& vector) {
  const std::size_t k = vector.size();
  PairTable table(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double denominator = vector.values[i] + vector.values[j];
      if (!(denominator > 0.0)) {
        Fail(ErrorCode::kPrecondition,
             "relative replicability is ill-posed: U(" + vector.study_ids[i] +
                 ") + U(" + vector.study_ids[j] +
                 ") <= 0; rescale the utility or use the absolute definition");
      }
      table[i][j] = table[j][i] =
          2.0 * std::fabs(vector.values[i] - vector.values[j]) / denominator;
    }
  }
  return table;
}

Verdict AbsoluteEpsilon(const UtilityVector& vector, double epsilon) {
  CheckEpsilon(epsilon);
  return MakeVerdict(Definition::kAbsolute, epsilon, vector.study_ids,
                     AbsoluteDifferences(vector));
}

Verdict RelativeEpsilon(const UtilityVector& vector, double epsilon) {
  CheckEpsilon(epsilon);
  return MakeVerdict(Definition::kRelative, epsilon, vector.study_ids,
                     RelativeDifferences(vector));
}

std::string RelationName(Relation r) {
  switch (r) {
    case Relation::kDominates: return "dominates";
    case Relation::kDominatedBy: return "dominated_by";
    case Relation::kIncomparable: return "incomparable";
    case Relation::kEqual: return "equal";
  }
  return "?";
}

double Spread(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

DominanceResult Dominance(const UtilityVector& a, const UtilityVector& b) {
  if (a.study_ids != b.study_ids) {
    Fail(ErrorCode::kInvalidArgument,
         "dominance needs the same studies in the same order");
  }
  DominanceResult result;
  result.spread_a = Spread(a.values);
  result.spread_b = Spread(b.values);
  for (std::size_t k = 0; k < a.size(); ++k) {
    result.per_study_deltas.push_back(a.values[k] - b.values[k]);
  }
  if (a.values == b.values) {
    result.relation = Relation::kEqual;
  } else if (result.spread_a <= result.spread_b &&
             AllLessEqual(b.values, a.values)) {
    result.relation = Relation::kDominates;
  } else if (result.spread_b <= result.spread_a &&
             AllLessEqual(a.values, b.values)) {
    result.relation = Relation::kDominatedBy;
  } else {
    result.relation = Relation::kIncomparable;
  }
  return result;
}

std::string RegionName(Region r) {
  switch (r) {
    case Region::kA: return "A";
    case Region::kB: return "B";
    case Region::kC: return "C";
    case Region::kOther: return "other";
  }
  return "?";
}

Region ClassifyRegion(std::pair<double, double> reference,
                      std::pair<double, double> alternative) {
  const double ref_spread = std::fabs(reference.first - reference.second);
  const double alt_spread = std::fabs(alternative.first - alternative.second);
  const bool above = alternative.first >= reference.first &&
                     alternative.second >= reference.second;
  const bool below = alternative.first <= reference.first &&
                     alternative.second <= reference.second;
  if (above) return alt_spread <= ref_spread ? Region::kB : Region::kC;
  if (below && alt_spread <= ref_spread) return Region::kA;
  return Region::kOther;
}

double TotalVariationDistance(const DiscreteJoint& f, const DiscreteJoint& g) {
  if (f.num_labels != g.num_labels || f.feature_name != g.feature_name) {
    Fail(ErrorCode::kInvalidArgument,
         "total variation needs joints over the same cell space");
  }
  std::set<JointCell> cells;
  for (const auto& [cell, _] : f.frequencies) cells.insert(cell);
  for (const auto& [cell, _] : g.frequencies) cells.insert(cell);
  double sum = 0.0;
  for (const auto& cell : cells) {
    sum += std::fabs(f.Frequency(cell) - g.Frequency(cell));
  }
  return 0.5 * sum;
}

double KolmogorovSmirnovJointDistance(const ScoredJoint& f,
                                      const ScoredJoint& g) {
  if (f.weights.empty() || g.weights.empty()) {
    Fail(ErrorCode::kInvalidArgument, "joint CDF distance of an empty joint");
  }
  if (f.num_labels != g.num_labels) {
    Fail(ErrorCode::kInvalidArgument,
         "joint CDF distance needs the same label set");
  }
  const int labels = f.num_labels;
  // Per-label mass at or below the current score.
  std::vector<double> mass_f(labels, 0.0);
  std::vector<double> mass_g(labels, 0.0);
  auto it_f = f.weights.begin();
  auto it_g = g.weights.begin();
  double sup = 0.0;
  while (it_f != f.weights.end() || it_g != g.weights.end()) {
    double s;
    if (it_g == g.weights.end()) {
      s = it_f->first.first;
    } else if (it_f == f.weights.end()) {
      s = it_g->first.first;
    } else {
      s = std::min(it_f->first.first, it_g->first.first);
    }
    for (; it_f != f.weights.end() && it_f->first.first == s; ++it_f) {
      mass_f[it_f->first.second] += it_f->second;
    }
    for (; it_g != g.weights.end() && it_g->first.first == s; ++it_g) {
      mass_g[it_g->first.second] += it_g->second;
    }
    double cdf_f = 0.0;
    double cdf_g = 0.0;
    for (int y = 0; y < labels; ++y) {
      cdf_f += mass_f[y];
      cdf_g += mass_g[y];
      sup = std::max(sup, std::fabs(cdf_f - cdf_g));
    }
  }
  return sup;
}

double JointDistance(const EmpiricalJoint& f, const EmpiricalJoint& g) {
  if (f.index() != g.index()) {
    Fail(ErrorCode::kInvalidArgument, "cannot compare discrete and scored joints");
  }
  if (const auto* df = std::get_if<DiscreteJoint>(&f)) {
    return TotalVariationDistance(*df, std::get<DiscreteJoint>(g));
  }
  return KolmogorovSmirnovJointDistance(std::get<ScoredJoint>(f),
                                        std::get<ScoredJoint>(g));
}

std::vector<EmpiricalJoint> StudyJoints(const StudyCollection& collection,
                                        DistanceBackend backend,
                                        const DecisionRule& rule) {
  const JointSelector selector = backend == DistanceBackend::kTotalVariation
                                     ? JointSelector::Rule(rule)
                                     : JointSelector::Score();
  std::vector<EmpiricalJoint> joints;
  for (const auto& study : collection.studies()) {
    joints.push_back(
        ComputeEmpiricalJoint(study, collection.schema(), selector));
  }
  return joints;
}

PairTable DistanceTable(const std::vector<EmpiricalJoint>& joints) {
  const std::size_t k = joints.size();
  PairTable table(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      table[i][j] = table[j][i] = JointDistance(joints[i], joints[j]);
    }
  }
  return table;
}

Verdict DistanceEpsilon(const StudyCollection& collection,
                        DistanceBackend backend, const DecisionRule& rule,
                        double epsilon) {
  CheckEpsilon(epsilon);
  Verdict verdict =
      MakeVerdict(Definition::kDistance, epsilon, collection.StudyIds(),
                  DistanceTable(StudyJoints(collection, backend, rule)));
  verdict.backend = backend;
  return verdict;
}

double UtilityOfJoint(const EmpiricalJoint& joint, const UtilitySpec& utility,
                      const DecisionRule& rule) {
  double value = 0.0;
  if (const auto* discrete = std::get_if<DiscreteJoint>(&joint)) {
    for (const auto& [cell, freq] : discrete->frequencies) {
      if (freq != 0.0) value += utility.Value(cell.prediction, cell.label) * freq;
    }
    return value;
  }
  if (rule.kind != DecisionRule::Kind::kThreshold) {
    Fail(ErrorCode::kPrecondition,
         "a scored joint needs a threshold rule to yield actions");
  }
  for (const auto& [point, weight] : std::get<ScoredJoint>(joint).weights) {
    const Label action = point.first >= rule.threshold ? 1 : 0;
    value += utility.Value(action, point.second) * weight;
  }
  return value;
}

double UtilityPseudoDistance(const EmpiricalJoint& f, const EmpiricalJoint& g,
                             const UtilitySpec& utility,
                             const DecisionRule& rule) {
  return std::fabs(UtilityOfJoint(f, utility, rule) -
                   UtilityOfJoint(g, utility, rule));
}

BenchmarkSummary BenchmarkCompare(const Study& study, const DecisionRule& rule,
                                  const UtilitySpec& utility, double u0,
                                  int num_labels) {
  if (!std::isfinite(u0)) {
    Fail(ErrorCode::kInvalidArgument, "benchmark value must be finite");
  }
  BenchmarkSummary summary;
  summary.mean_utility = AverageUtility(study, rule, utility, num_labels);
  summary.gap = summary.mean_utility - u0;
  summary.per_unit.reserve(study.size());
  for (const auto& unit : study.units) {
    summary.per_unit.push_back(
        UnitUtility(utility, ApplyRule(rule, unit), unit));
  }
  return summary;
}

}  // namespace replica

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

// Replicability verdicts over a collection of studies.
//
// Three definitions are supported, each bounding a maximum over study pairs:
//   absolute  max |U_k - U_j|
//   relative  max 2 |U_k - U_j| / (U_k + U_j)
//   distance  max D(F_k, F_j), D = total variation (class-valued joints) or
//             the sup-difference of joint score/label CDFs (scored joints)
// plus the dominance relation between two rules, the two-study region
// classification used for plotting, and the single-study benchmark.
//
// Local replicability is Restrict() followed by any of these.

#ifndef REPLICA_REPLICABILITY_H_
#define REPLICA_REPLICABILITY_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evaluation.h"

namespace replica {

enum class Definition { kAbsolute, kRelative, kDistance };
enum class DistanceBackend { kTotalVariation, kKolmogorovSmirnov };

std::string DefinitionName(Definition d);
std::string BackendName(DistanceBackend b);
DistanceBackend ParseBackend(const std::string& name);

// Slack for comparing a computed statistic against a user-supplied epsilon:
// 1e-12 * max(1, epsilon). Absorbs rounding in differences such as
// 0.75 - 0.70.
bool WithinEpsilon(double statistic, double epsilon);

using PairTable = std::vector<std::vector<double>>;

struct Verdict {
  Definition definition = Definition::kAbsolute;
  std::optional<DistanceBackend> backend;  // distance definition only
  double epsilon = 0.0;
  double achieved = 0.0;
  bool replicable = true;
  std::pair<std::string, std::string> worst_pair;
  std::vector<std::string> study_ids;
  PairTable pairwise;  // symmetric, zero diagonal
};

// Fills achieved / worst_pair / replicable from a pairwise table. The worst
// pair is the first (k < j) in row-major order attaining the maximum.
Verdict MakeVerdict(Definition definition, double epsilon,
                    std::vector<std::string> study_ids, PairTable pairwise);

PairTable AbsoluteDifferences(const UtilityVector& vector);
// Throws kPrecondition when some pair has U_k + U_j <= 0.
PairTable RelativeDifferences(const UtilityVector& vector);

Verdict AbsoluteEpsilon(const UtilityVector& vector, double epsilon);
Verdict RelativeEpsilon(const UtilityVector& vector, double epsilon);

enum class Relation { kDominates, kDominatedBy, kIncomparable, kEqual };
std::string RelationName(Relation r);

struct DominanceResult {
  Relation relation = Relation::kIncomparable;
  double spread_a = 0.0;
  double spread_b = 0.0;
  std::vector<double> per_study_deltas;  // a_k - b_k
};

// max_k U_k - min_k U_k, i.e. the largest pairwise absolute difference.
double Spread(const std::vector<double>& values);

// a dominates b when spread(a) <= spread(b) and b_k <= a_k for every k.
DominanceResult Dominance(const UtilityVector& a, const UtilityVector& b);

enum class Region { kA, kB, kC, kOther };
std::string RegionName(Region r);

// Position of an alternative rule's utilities relative to a reference rule,
// two studies only:
//   B  alternative >= reference in both studies, spread no larger
//   C  alternative >= reference in both studies, spread strictly larger
//   A  alternative <= reference in both studies, spread no larger
Region ClassifyRegion(std::pair<double, double> reference,
                      std::pair<double, double> alternative);

double TotalVariationDistance(const DiscreteJoint& f, const DiscreteJoint& g);
double KolmogorovSmirnovJointDistance(const ScoredJoint& f,
                                      const ScoredJoint& g);
double JointDistance(const EmpiricalJoint& f, const EmpiricalJoint& g);

// Joints of every study for the backend: TV uses the rule's discrete joint,
// KS the raw scored joint.
std::vector<EmpiricalJoint> StudyJoints(const StudyCollection& collection,
                                        DistanceBackend backend,
                                        const DecisionRule& rule);

PairTable DistanceTable(const std::vector<EmpiricalJoint>& joints);

Verdict DistanceEpsilon(const StudyCollection& collection,
                        DistanceBackend backend, const DecisionRule& rule,
                        double epsilon);

// Average utility as a functional of a joint. Scored joints are first
// mapped through the rule; discrete joints already hold actions.
double UtilityOfJoint(const EmpiricalJoint& joint, const UtilitySpec& utility,
                      const DecisionRule& rule);

// |U(f) - U(g)|. Not a metric: it can vanish for distinct joints.
double UtilityPseudoDistance(const EmpiricalJoint& f, const EmpiricalJoint& g,
                             const UtilitySpec& utility,
                             const DecisionRule& rule);

struct BenchmarkSummary {
  double mean_utility = 0.0;
  double gap = 0.0;  // mean_utility - u0
  std::vector<double> per_unit;
};

BenchmarkSummary BenchmarkCompare(const Study& study, const DecisionRule& rule,
                                  const UtilitySpec& utility, double u0,
                                  int num_labels = 2);

}  // namespace replica

#endif  // REPLICA_REPLICABILITY_H_

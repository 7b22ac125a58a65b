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

// Resampling and permutation inference for replicability statistics.
//
// Every replicate r (bootstrap draw, pseudo-collection, permutation) uses
// its own engine seeded with SubstreamSeed(seed, r), so results are a pure
// function of (inputs, seed) and do not depend on evaluation order.

#ifndef REPLICA_INFERENCE_H_
#define REPLICA_INFERENCE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "replicability.h"
#include "rng.h"

namespace replica {

enum class Statistic { kMaxAbsDiff, kMaxRelativeDiff, kMaxDistance };
std::string StatisticName(Statistic s);
Statistic ParseStatistic(const std::string& name);

struct ResamplePlan {
  enum class Scheme { kWithinStudy, kCluster, kStudyStrap };

  Scheme scheme = Scheme::kWithinStudy;
  int replicates = 1000;
  std::uint64_t seed = 0;
  double gamma = 0.0;  // study strap only

  void Validate() const;
};

std::string SchemeName(ResamplePlan::Scheme s);
ResamplePlan::Scheme ParseScheme(const std::string& name);

// Collection flattened to one record per unit, with the rule applied once.
struct UnitRecord {
  Label action = 0;
  Label label = 0;
  double score = 0.0;
};

// Evaluates a replicability statistic on arbitrary groupings of the pooled
// units of a collection. Groups are lists of indices into pooled().
class GroupStatistic {
 public:
  using Groups = std::vector<std::vector<std::size_t>>;

  GroupStatistic(const StudyCollection& collection, const DecisionRule& rule,
                 const UtilitySpec& utility, Statistic statistic,
                 DistanceBackend backend = DistanceBackend::kTotalVariation);

  const std::vector<UnitRecord>& pooled() const { return pooled_; }
  // The collection's own grouping.
  const Groups& studies() const { return studies_; }
  Statistic statistic() const { return statistic_; }
  DistanceBackend backend() const { return backend_; }

  // Per-group average utilities (utility statistics only use these).
  std::vector<double> Utilities(const Groups& groups) const;
  PairTable Pairwise(const Groups& groups) const;
  double Evaluate(const Groups& groups) const;

 private:
  int num_labels_;
  UtilitySpec utility_;
  Statistic statistic_;
  DistanceBackend backend_;
  std::vector<UnitRecord> pooled_;
  Groups studies_;
};

double MaxOffDiagonal(const PairTable& table);

// Linear-interpolation quantile (type 7) of an unsorted sample.
double Quantile(std::vector<double> values, double q);

struct StudyBootstrap {
  std::string study_id;
  double observed = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool degenerate = false;  // n_k == 1
  std::vector<double> draws;
};

struct WithinBootstrapResult {
  double level = 0.95;
  std::vector<StudyBootstrap> studies;
  // Variance of U_k - U_j assuming independent studies: var_k + var_j.
  PairTable difference_variance;
};

WithinBootstrapResult BootstrapWithin(const StudyCollection& collection,
                                      const DecisionRule& rule,
                                      const UtilitySpec& utility,
                                      const ResamplePlan& plan,
                                      double level = 0.95);

struct ResampleDistribution {
  double observed = 0.0;
  std::vector<double> statistics;
  double mean = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
};

ResampleDistribution Summarize(double observed, std::vector<double> statistics);

// Resamples studies with replacement, then units within each drawn study.
ResampleDistribution ClusterBootstrap(const GroupStatistic& statistic,
                                      const ResamplePlan& plan);

// One study-strap replicate as groups of pooled indices. Pseudo-study k
// has target_sizes[k] units; each draw comes from the pooled collection with
// probability gamma and from study k otherwise.
GroupStatistic::Groups StudyStrapGroups(const GroupStatistic::Groups& studies,
                                        std::size_t pooled_size,
                                        const std::vector<std::size_t>& sizes,
                                        double gamma, Engine& engine);

// Pseudo-collections, one per replicate. Empty target_sizes means n_k.
std::vector<StudyCollection> StudyStrap(
    const StudyCollection& collection, const ResamplePlan& plan,
    const std::vector<std::size_t>& target_sizes = {});

ResampleDistribution StudyStrapDistribution(const GroupStatistic& statistic,
                                            const ResamplePlan& plan);

// Share of statistics within epsilon.
double EpsilonRate(const std::vector<double>& statistics, double epsilon);

enum class Adjustment { kNone, kBonferroni };
std::string AdjustmentName(Adjustment a);
Adjustment ParseAdjustment(const std::string& name);

struct TestResult {
  Statistic statistic = Statistic::kMaxAbsDiff;
  double statistic_observed = 0.0;
  double p_value = 1.0;
  int permutations = 0;
  std::uint64_t seed = 0;
  std::vector<double> null_draws;
  Adjustment adjust = Adjustment::kNone;
  std::vector<std::string> study_ids;
  // Filled when adjust != kNone.
  PairTable pairwise_observed;
  PairTable pairwise_p;
  PairTable pairwise_p_adjusted;
};

// Units are pooled and reassigned to studies uniformly at random with the
// sizes n_1..n_K held fixed. p = (1 + #{null >= observed}) / (P + 1).
TestResult PermutationTest(const GroupStatistic& statistic, int permutations,
                           std::uint64_t seed, Adjustment adjust);

}  // namespace replica

#endif  // REPLICA_INFERENCE_H_

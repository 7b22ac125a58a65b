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

#include "inference.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.h"

namespace replica {
namespace {

bool NeedsActions(Statistic statistic, DistanceBackend backend) {
  return statistic != Statistic::kMaxDistance ||
         backend == DistanceBackend::kTotalVariation;
}

// Null draws at or above the observed value, with the same rounding slack
// as WithinEpsilon so that mathematically tied draws count as ties.
bool AtLeast(double draw, double observed) {
  return draw >= observed - 1e-12 * std::max(1.0, std::fabs(observed));
}

}  // namespace

std::string StatisticName(Statistic s) {
  switch (s) {
    case Statistic::kMaxAbsDiff: return "max_abs_diff";
    case Statistic::kMaxRelativeDiff: return "max_relative_diff";
    case Statistic::kMaxDistance: return "max_distance";
  }
  return "?";
}

Statistic ParseStatistic(const std::string& name) {
  if (name == "max_abs_diff") return Statistic::kMaxAbsDiff;
  if (name == "max_relative_diff") return Statistic::kMaxRelativeDiff;
  if (name == "max_distance") return Statistic::kMaxDistance;
  Fail(ErrorCode::kInvalidArgument, "unknown statistic '" + name + "'");
}

std::string SchemeName(ResamplePlan::Scheme s) {
  switch (s) {
    case ResamplePlan::Scheme::kWithinStudy: return "within_study_bootstrap";
    case ResamplePlan::Scheme::kCluster: return "cluster_bootstrap";
    case ResamplePlan::Scheme::kStudyStrap: return "study_strap";
  }
  return "?";
}

ResamplePlan::Scheme ParseScheme(const std::string& name) {
  if (name == "within_study_bootstrap" || name == "within") {
    return ResamplePlan::Scheme::kWithinStudy;
  }
  if (name == "cluster_bootstrap" || name == "cluster") {
    return ResamplePlan::Scheme::kCluster;
  }
  if (name == "study_strap" || name == "strap") {
    return ResamplePlan::Scheme::kStudyStrap;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown resampling scheme '" + name + "'");
}

void ResamplePlan::Validate() const {
  if (replicates < 1) {
    Fail(ErrorCode::kInvalidArgument, "replicates must be >= 1");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "gamma must lie in [0, 1]");
  }
}

std::string AdjustmentName(Adjustment a) {
  return a == Adjustment::kNone ? "none" : "bonferroni";
}

Adjustment ParseAdjustment(const std::string& name) {
  if (name == "none") return Adjustment::kNone;
  if (name == "bonferroni") return Adjustment::kBonferroni;
  Fail(ErrorCode::kInvalidArgument, "unknown adjustment '" + name + "'");
}

GroupStatistic::GroupStatistic(const StudyCollection& collection,
                               const DecisionRule& rule,
                               const UtilitySpec& utility, Statistic statistic,
                               DistanceBackend backend)
    : num_labels_(collection.schema().NumLabels()),
      utility_(utility),
      statistic_(statistic),
      backend_(backend) {
  if (rule.kind == DecisionRule::Kind::kThreshold && num_labels_ != 2) {
    Fail(ErrorCode::kPrecondition, "threshold rules need a binary label set");
  }
  const bool needs_actions = NeedsActions(statistic, backend);
  const bool needs_scores = statistic == Statistic::kMaxDistance &&
                            backend == DistanceBackend::kKolmogorovSmirnov;
  for (const auto& study : collection.studies()) {
    std::vector<std::size_t> indices;
    for (const auto& unit : study.units) {
      UnitRecord record;
      record.label = unit.label;
      if (needs_actions) record.action = ApplyRule(rule, unit);
      if (needs_scores) {
        if (!unit.score) {
          Fail(ErrorCode::kPrecondition,
               "study '" + study.id + "': joint CDF distance needs scores");
        }
        record.score = *unit.score;
      }
      indices.push_back(pooled_.size());
      pooled_.push_back(record);
    }
    studies_.push_back(std::move(indices));
  }
}

std::vector<double> GroupStatistic::Utilities(const Groups& groups) const {
  std::vector<double> values;
  values.reserve(groups.size());
  std::vector<long long> counts(
      static_cast<std::size_t>(num_labels_ * num_labels_));
  for (const auto& group : groups) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i : group) {
      const UnitRecord& r = pooled_[i];
      ++counts[static_cast<std::size_t>(r.action * num_labels_ + r.label)];
    }
    values.push_back(UtilityFromCounts(utility_, counts, num_labels_,
                                       static_cast<long long>(group.size())));
  }
  return values;
}

PairTable GroupStatistic::Pairwise(const Groups& groups) const {
  for (const auto& g : groups) {
    if (g.empty()) Fail(ErrorCode::kPrecondition, "empty group");
  }
  if (statistic_ != Statistic::kMaxDistance) {
    UtilityVector vector;
    vector.values = Utilities(groups);
    for (std::size_t k = 0; k < groups.size(); ++k) {
      vector.study_ids.push_back("#" + std::to_string(k + 1));
    }
    return statistic_ == Statistic::kMaxAbsDiff ? AbsoluteDifferences(vector)
                                                : RelativeDifferences(vector);
  }
  std::vector<EmpiricalJoint> joints;
  joints.reserve(groups.size());
  for (const auto& group : groups) {
    const double n = static_cast<double>(group.size());
    if (backend_ == DistanceBackend::kTotalVariation) {
      std::map<JointCell, long long> counts;
      for (std::size_t i : group) {
        ++counts[{pooled_[i].action, pooled_[i].label, ""}];
      }
      DiscreteJoint joint;
      joint.num_labels = num_labels_;
      for (const auto& [cell, c] : counts) {
        joint.frequencies.emplace(cell, static_cast<double>(c) / n);
      }
      joints.emplace_back(std::move(joint));
    } else {
      std::map<std::pair<double, Label>, long long> counts;
      for (std::size_t i : group) ++counts[{pooled_[i].score, pooled_[i].label}];
      ScoredJoint joint;
      joint.num_labels = num_labels_;
      for (const auto& [key, c] : counts) {
        joint.weights.emplace(key, static_cast<double>(c) / n);
      }
      joints.emplace_back(std::move(joint));
    }
  }
  return DistanceTable(joints);
}

double GroupStatistic::Evaluate(const Groups& groups) const {
  return MaxOffDiagonal(Pairwise(groups));
}

double MaxOffDiagonal(const PairTable& table) {
  double best = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = i + 1; j < table.size(); ++j) {
      best = std::max(best, table[i][j]);
    }
  }
  return best;
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) Fail(ErrorCode::kPrecondition, "quantile of no values");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

WithinBootstrapResult BootstrapWithin(const StudyCollection& collection,
                                      const DecisionRule& rule,
                                      const UtilitySpec& utility,
                                      const ResamplePlan& plan, double level) {
  plan.Validate();
  if (!(level > 0.0 && level < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "confidence level must lie in (0, 1)");
  }
  const GroupStatistic evaluator(collection, rule, utility,
                                 Statistic::kMaxAbsDiff);
  WithinBootstrapResult result;
  result.level = level;
  const auto& studies = evaluator.studies();
  for (std::size_t k = 0; k < studies.size(); ++k) {
    const auto& members = studies[k];
    const std::uint64_t study_seed = SubstreamSeed(plan.seed, k);
    StudyBootstrap summary;
    summary.study_id = collection.study(k).id;
    summary.observed = evaluator.Utilities({members}).front();
    summary.degenerate = members.size() == 1;
    GroupStatistic::Groups draw(1, std::vector<std::size_t>(members.size()));
    for (int b = 0; b < plan.replicates; ++b) {
      Engine engine = SubstreamEngine(study_seed, static_cast<std::uint64_t>(b));
      for (auto& slot : draw[0]) {
        slot = members[UniformIndex(engine, members.size())];
      }
      summary.draws.push_back(evaluator.Utilities(draw).front());
    }
    const double count = static_cast<double>(summary.draws.size());
    summary.mean =
        std::accumulate(summary.draws.begin(), summary.draws.end(), 0.0) /
        count;
    if (summary.draws.size() > 1 && !summary.degenerate) {
      double ss = 0.0;
      for (double d : summary.draws) ss += (d - summary.mean) * (d - summary.mean);
      summary.variance = ss / (count - 1.0);
    }
    const double tail = (1.0 - level) / 2.0;
    summary.ci_low = Quantile(summary.draws, tail);
    summary.ci_high = Quantile(summary.draws, 1.0 - tail);
    result.studies.push_back(std::move(summary));
  }
  const std::size_t k = result.studies.size();
  result.difference_variance.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) {
        result.difference_variance[i][j] =
            result.studies[i].variance + result.studies[j].variance;
      }
    }
  }
  return result;
}

ResampleDistribution Summarize(double observed, std::vector<double> statistics) {
  ResampleDistribution dist;
  dist.observed = observed;
  if (!statistics.empty()) {
    dist.mean = std::accumulate(statistics.begin(), statistics.end(), 0.0) /
                static_cast<double>(statistics.size());
    dist.q025 = Quantile(statistics, 0.025);
    dist.q50 = Quantile(statistics, 0.5);
    dist.q975 = Quantile(statistics, 0.975);
  }
  dist.statistics = std::move(statistics);
  return dist;
}

ResampleDistribution ClusterBootstrap(const GroupStatistic& statistic,
                                      const ResamplePlan& plan) {
  plan.Validate();
  const auto& studies = statistic.studies();
  const std::size_t k = studies.size();
  if (k < 2) {
    Fail(ErrorCode::kPrecondition, "cluster bootstrap needs at least two studies");
  }
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(plan.replicates));
  GroupStatistic::Groups groups(k);
  for (int r = 0; r < plan.replicates; ++r) {
    Engine engine = SubstreamEngine(plan.seed, static_cast<std::uint64_t>(r));
    for (auto& group : groups) {
      const auto& source = studies[UniformIndex(engine, k)];
      group.resize(source.size());
      for (auto& slot : group) slot = source[UniformIndex(engine, source.size())];
    }
    stats.push_back(statistic.Evaluate(groups));
  }
  return Summarize(statistic.Evaluate(studies), std::move(stats));
}

GroupStatistic::Groups StudyStrapGroups(const GroupStatistic::Groups& studies,
                                        std::size_t pooled_size,
                                        const std::vector<std::size_t>& sizes,
                                        double gamma, Engine& engine) {
  GroupStatistic::Groups groups(studies.size());
  for (std::size_t k = 0; k < studies.size(); ++k) {
    groups[k].resize(sizes[k]);
    for (auto& slot : groups[k]) {
      if (Uniform01(engine) < gamma) {
        slot = UniformIndex(engine, pooled_size);
      } else {
        slot = studies[k][UniformIndex(engine, studies[k].size())];
      }
    }
  }
  return groups;
}

namespace {

std::vector<std::size_t> StrapSizes(const GroupStatistic::Groups& studies,
                                    const std::vector<std::size_t>& target) {
  if (target.empty()) {
    std::vector<std::size_t> sizes;
    for (const auto& s : studies) sizes.push_back(s.size());
    return sizes;
  }
  if (target.size() != studies.size()) {
    Fail(ErrorCode::kInvalidArgument, "one target size per study expected");
  }
  for (std::size_t s : target) {
    if (s == 0) Fail(ErrorCode::kInvalidArgument, "target sizes must be >= 1");
  }
  return target;
}

}  // namespace

std::vector<StudyCollection> StudyStrap(
    const StudyCollection& collection, const ResamplePlan& plan,
    const std::vector<std::size_t>& target_sizes) {
  plan.Validate();
  std::vector<const Unit*> pooled;
  GroupStatistic::Groups studies;
  for (const auto& study : collection.studies()) {
    std::vector<std::size_t> members;
    for (const auto& unit : study.units) {
      members.push_back(pooled.size());
      pooled.push_back(&unit);
    }
    studies.push_back(std::move(members));
  }
  if (pooled.empty()) Fail(ErrorCode::kPrecondition, "empty collection");
  const auto sizes = StrapSizes(studies, target_sizes);
  std::vector<StudyCollection> out;
  out.reserve(static_cast<std::size_t>(plan.replicates));
  for (int r = 0; r < plan.replicates; ++r) {
    Engine engine = SubstreamEngine(plan.seed, static_cast<std::uint64_t>(r));
    const auto groups =
        StudyStrapGroups(studies, pooled.size(), sizes, plan.gamma, engine);
    std::vector<Study> pseudo;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      Study s;
      s.id = collection.study(k).id;
      s.metadata = collection.study(k).metadata;
      for (std::size_t i : groups[k]) s.units.push_back(*pooled[i]);
      pseudo.push_back(std::move(s));
    }
    out.emplace_back(collection.schema(), std::move(pseudo));
  }
  return out;
}

ResampleDistribution StudyStrapDistribution(const GroupStatistic& statistic,
                                            const ResamplePlan& plan) {
  plan.Validate();
  const auto& studies = statistic.studies();
  const auto sizes = StrapSizes(studies, {});
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(plan.replicates));
  for (int r = 0; r < plan.replicates; ++r) {
    Engine engine = SubstreamEngine(plan.seed, static_cast<std::uint64_t>(r));
    stats.push_back(statistic.Evaluate(StudyStrapGroups(
        studies, statistic.pooled().size(), sizes, plan.gamma, engine)));
  }
  return Summarize(statistic.Evaluate(studies), std::move(stats));
}

double EpsilonRate(const std::vector<double>& statistics, double epsilon) {
  if (statistics.empty()) {
    Fail(ErrorCode::kPrecondition, "epsilon rate of no statistics");
  }
  if (!(epsilon >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
  }
  const auto hits = std::count_if(
      statistics.begin(), statistics.end(),
      [epsilon](double s) { return WithinEpsilon(s, epsilon); });
  return static_cast<double>(hits) / static_cast<double>(statistics.size());
}

TestResult PermutationTest(const GroupStatistic& statistic, int permutations,
                           std::uint64_t seed, Adjustment adjust) {
  const auto& studies = statistic.studies();
  const std::size_t k = studies.size();
  if (k < 2) {
    Fail(ErrorCode::kPrecondition, "permutation test needs at least two studies");
  }
  if (permutations < 1) {
    Fail(ErrorCode::kInvalidArgument, "permutations must be >= 1");
  }
  TestResult result;
  result.statistic = statistic.statistic();
  result.permutations = permutations;
  result.seed = seed;
  result.adjust = adjust;
  const PairTable observed = statistic.Pairwise(studies);
  result.statistic_observed = MaxOffDiagonal(observed);

  const std::size_t total = statistic.pooled().size();
  std::vector<std::size_t> order(total);
  GroupStatistic::Groups groups(k);
  for (std::size_t g = 0; g < k; ++g) groups[g].resize(studies[g].size());

  long long exceed = 0;
  PairTable pair_exceed(k, std::vector<double>(k, 0.0));
  result.null_draws.reserve(static_cast<std::size_t>(permutations));
  for (int p = 0; p < permutations; ++p) {
    Engine engine = SubstreamEngine(seed, static_cast<std::uint64_t>(p));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), engine);
    std::size_t next = 0;
    for (auto& group : groups) {
      for (auto& slot : group) slot = order[next++];
    }
    const PairTable table = statistic.Pairwise(groups);
    const double draw = MaxOffDiagonal(table);
    result.null_draws.push_back(draw);
    if (AtLeast(draw, result.statistic_observed)) ++exceed;
    if (adjust != Adjustment::kNone) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          if (AtLeast(table[i][j], observed[i][j])) pair_exceed[i][j] += 1.0;
        }
      }
    }
  }
  const double denominator = static_cast<double>(permutations) + 1.0;
  result.p_value = (1.0 + static_cast<double>(exceed)) / denominator;

  if (adjust != Adjustment::kNone) {
    const double pairs = static_cast<double>(k * (k - 1) / 2);
    result.pairwise_observed = observed;
    result.pairwise_p.assign(k, std::vector<double>(k, 1.0));
    result.pairwise_p_adjusted.assign(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const double p = (1.0 + pair_exceed[i][j]) / denominator;
        result.pairwise_p[i][j] = result.pairwise_p[j][i] = p;
        result.pairwise_p_adjusted[i][j] = result.pairwise_p_adjusted[j][i] =
            std::min(1.0, p * pairs);
      }
    }
  }
  return result;
}

}  // namespace replica

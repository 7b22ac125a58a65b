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

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "error.h"

namespace replica {
namespace {

constexpr const char* kPermutationNote =
    "null distribution: units pooled and reassigned to studies uniformly at "
    "random with study sizes fixed";
constexpr const char* kDependenceNote =
    "pairwise statistics share studies and are not independent; only "
    "Bonferroni adjustment is offered";
constexpr const char* kDiagnosticNote =
    "per-study optimal thresholds are a diagnostic only; the assessment "
    "uses the single rule above";

// JSON has no infinities; thresholds may be +/-inf.
Json Real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json Table(const PairTable& table) {
  Json rows = Json::array();
  for (const auto& row : table) {
    Json r = Json::array();
    for (double v : row) r.push_back(Real(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

Json Header(const std::string& command, const AssessmentConfig& config) {
  Json body;
  body["tool"] = kToolName;
  body["version"] = kToolVersion;
  body["command"] = command;
  body["seed"] = config.seed;
  body["config"] = config.raw;
  return body;
}

struct Loaded {
  StudyCollection collection;
  std::vector<std::string> dropped;
};

Loaded LoadAndRestrict(const AssessmentConfig& config) {
  StudyCollection collection = LoadCollection(config.load);
  if (!config.restrict) return {std::move(collection), {}};
  RestrictResult restricted = Restrict(collection, *config.restrict);
  return {std::move(restricted.collection),
          std::move(restricted.dropped_studies)};
}

Json CollectionJson(const Loaded& loaded, bool restricted) {
  Json studies = Json::array();
  for (const auto& s : loaded.collection.studies()) {
    studies.push_back({{"id", s.id}, {"n", s.size()}});
  }
  Json out;
  out["k"] = loaded.collection.size();
  out["studies"] = std::move(studies);
  out["restricted"] = restricted;
  out["dropped_by_restriction"] = loaded.dropped;
  return out;
}

double PooledPrevalence(const StudyCollection& collection) {
  long long positives = 0;
  for (const auto& s : collection.studies()) {
    for (const auto& u : s.units) positives += u.label == 1 ? 1 : 0;
  }
  return static_cast<double>(positives) /
         static_cast<double>(collection.TotalUnits());
}

Prevalence ResolvePrevalence(const PrevalenceConfig& config,
                             const StudyCollection& collection) {
  switch (config.source) {
    case Prevalence::Source::kUserSpecified:
      return Prevalence::Make(*config.value, config.source);
    case Prevalence::Source::kEmpiricalPooled:
      return Prevalence::Make(PooledPrevalence(collection), config.source);
    case Prevalence::Source::kEmpiricalPerStudy:
      for (std::size_t k = 0; k < collection.size(); ++k) {
        if (collection.study(k).id == *config.study) {
          const auto& units = collection.study(k).units;
          long long positives = 0;
          for (const auto& u : units) positives += u.label == 1 ? 1 : 0;
          return Prevalence::Make(static_cast<double>(positives) /
                                      static_cast<double>(units.size()),
                                  config.source, static_cast<int>(k));
        }
      }
      Fail(ErrorCode::kInvalidArgument,
           "prevalence study '" + *config.study + "' not in the collection");
  }
  Fail(ErrorCode::kInternal, "unknown prevalence source");
}

std::string PrevalenceSourceName(Prevalence::Source s) {
  switch (s) {
    case Prevalence::Source::kUserSpecified: return "user_specified";
    case Prevalence::Source::kEmpiricalPooled: return "empirical_pooled";
    case Prevalence::Source::kEmpiricalPerStudy: return "empirical_per_study";
  }
  return "?";
}

struct ResolvedRule {
  DecisionRule rule;
  Json description;
};

ResolvedRule ResolveRule(const RuleConfig& rc, const AssessmentConfig& config,
                         const StudyCollection& collection) {
  ResolvedRule out;
  out.description["kind"] = RuleKindName(rc.kind);
  switch (rc.kind) {
    case RuleConfig::Kind::kIdentity:
      out.rule = DecisionRule::Identity();
      return out;
    case RuleConfig::Kind::kThreshold:
      out.rule = DecisionRule::Threshold(rc.threshold);
      break;
    case RuleConfig::Kind::kOptimalClosedForm: {
      const Prevalence prevalence =
          ResolvePrevalence(config.prevalence, collection);
      const ThresholdChoice choice =
          OptimalThresholdClosedForm(config.utility, prevalence);
      out.rule = DecisionRule::Threshold(choice.threshold);
      out.description["prevalence"] = {
          {"source", PrevalenceSourceName(prevalence.source)},
          {"value", prevalence.value}};
      if (!choice.note.empty()) out.description["note"] = choice.note;
      break;
    }
    case RuleConfig::Kind::kOptimalEmpirical:
      out.rule = DecisionRule::Threshold(OptimalThresholdEmpirical(
          ScoredLabels(collection), config.utility));
      out.description["fitted_on"] = "pooled collection";
      break;
  }
  out.description["threshold"] = Real(out.rule.threshold);
  out.description["fires_on"] = "score >= threshold";
  return out;
}

Json UtilityJson(const UtilitySpec& utility,
                 const std::vector<std::string>& labels) {
  Json out;
  out["kind"] = UtilityKindName(utility.kind());
  if (utility.kind() == UtilitySpec::Kind::kBinaryError) {
    out["u01"] = utility.u01();
    out["u10"] = utility.u10();
  } else if (utility.kind() == UtilitySpec::Kind::kTable) {
    Json entries = Json::array();
    for (const auto& [key, value] : utility.table()) {
      entries.push_back({{"action", labels[key.first]},
                         {"label", labels[key.second]},
                         {"value", value}});
    }
    out["entries"] = std::move(entries);
  }
  return out;
}

Json VerdictJson(const Verdict& v) {
  Json out;
  out["definition"] = DefinitionName(v.definition);
  if (v.backend) out["backend"] = BackendName(*v.backend);
  out["epsilon"] = v.epsilon;
  out["achieved"] = v.achieved;
  out["replicable"] = v.replicable;
  out["worst_pair"] = {v.worst_pair.first, v.worst_pair.second};
  out["study_ids"] = v.study_ids;
  out["pairwise"] = Table(v.pairwise);
  return out;
}

Json UtilitiesJson(const UtilityVector& vector) {
  Json out;
  out["study_ids"] = vector.study_ids;
  out["values"] = vector.values;
  out["matrix"] = Table(ComputeUtilityMatrix(vector).entries);
  return out;
}

std::string UtilitiesCsv(const UtilityVector& vector) {
  const UtilityMatrix matrix = ComputeUtilityMatrix(vector);
  std::ostringstream out;
  out << "study_id,utility";
  for (const auto& id : vector.study_ids) out << ",diff_vs_" << id;
  out << '\n';
  for (std::size_t k = 0; k < vector.size(); ++k) {
    out << vector.study_ids[k] << ',' << FormatReal(vector.values[k]);
    for (double v : matrix.entries[k]) out << ',' << FormatReal(v);
    out << '\n';
  }
  return out.str();
}

std::string TableCsv(const std::vector<std::string>& ids, const PairTable& table) {
  std::ostringstream out;
  out << "study_id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (std::size_t k = 0; k < ids.size(); ++k) {
    out << ids[k];
    for (double v : table[k]) out << ',' << FormatReal(v);
    out << '\n';
  }
  return out.str();
}

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void Outcome(Json& body, int exit_code, const std::string& meaning) {
  body["outcome"] = {{"exit_code", exit_code}, {"meaning", meaning}};
}

}  // namespace

std::string FormatReal(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string Report::CanonicalJson() const { return body.dump(); }

std::string Report::CanonicalHash() const {
  const std::string canonical = CanonicalJson();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest, &length,
                 EVP_sha256(), nullptr) != 1) {
    Fail(ErrorCode::kInternal, "SHA-256 digest failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

std::string Report::FullJson() const {
  Json full = body;
  full["timestamp"] = timestamp;
  full["canonical_sha256"] = CanonicalHash();
  return full.dump(2) + "\n";
}

Report RunAssess(const AssessmentConfig& config) {
  const Loaded loaded = LoadAndRestrict(config);
  const StudyCollection& collection = loaded.collection;
  const ResolvedRule resolved = ResolveRule(config.rule, config, collection);
  const UtilityVector utilities =
      ComputeUtilityVector(collection, resolved.rule, config.utility);

  Report report;
  report.command = "assess";
  report.timestamp = Timestamp();
  Json& body = report.body;
  body = Header("assess", config);
  body["collection"] = CollectionJson(loaded, config.restrict.has_value());
  body["rule"] = resolved.description;
  body["utility"] = UtilityJson(config.utility, collection.schema().label_set);
  body["utilities"] = UtilitiesJson(utilities);

  std::ostringstream text;
  text << "replica assess: K=" << collection.size() << " studies, rule "
       << RuleKindName(config.rule.kind);
  if (resolved.rule.kind == DecisionRule::Kind::kThreshold) {
    text << " (threshold " << Fixed(resolved.rule.threshold) << ")";
  }
  text << ", utility " << UtilityKindName(config.utility.kind()) << "\n";
  if (!loaded.dropped.empty()) {
    text << "  dropped by restriction:";
    for (const auto& id : loaded.dropped) text << ' ' << id;
    text << '\n';
  }
  for (std::size_t k = 0; k < utilities.size(); ++k) {
    text << "  U[" << utilities.study_ids[k]
         << "] = " << Fixed(utilities.values[k]) << '\n';
  }

  bool all_replicable = true;
  Json verdicts = Json::array();
  for (const auto& request : config.definitions) {
    Verdict verdict;
    switch (request.definition) {
      case Definition::kAbsolute:
        verdict = AbsoluteEpsilon(utilities, request.epsilon);
        break;
      case Definition::kRelative:
        verdict = RelativeEpsilon(utilities, request.epsilon);
        break;
      case Definition::kDistance:
        verdict = DistanceEpsilon(collection, request.backend, resolved.rule,
                                  request.epsilon);
        break;
    }
    all_replicable = all_replicable && verdict.replicable;
    text << "  " << DefinitionName(verdict.definition)
         << (verdict.backend ? " (" + BackendName(*verdict.backend) + ")" : "")
         << " epsilon=" << Fixed(verdict.epsilon)
         << ": achieved " << Fixed(verdict.achieved) << " on ("
         << verdict.worst_pair.first << ", " << verdict.worst_pair.second
         << ") -> " << (verdict.replicable ? "REPLICABLE" : "NOT REPLICABLE")
         << '\n';
    verdicts.push_back(VerdictJson(verdict));
  }
  body["verdicts"] = std::move(verdicts);

  const PairTable distances = DistanceTable(
      StudyJoints(collection, config.distance_backend, resolved.rule));
  body["distances"] = {{"backend", BackendName(config.distance_backend)},
                       {"study_ids", collection.StudyIds()},
                       {"table", Table(distances)}};

  if (config.alternative_rule) {
    const ResolvedRule alt =
        ResolveRule(*config.alternative_rule, config, collection);
    const UtilityVector alt_utilities =
        ComputeUtilityVector(collection, alt.rule, config.utility);
    const DominanceResult dom = Dominance(utilities, alt_utilities);
    Json comparison;
    comparison["alternative_rule"] = alt.description;
    comparison["alternative_utilities"] = UtilitiesJson(alt_utilities);
    comparison["dominance"] = {{"relation", RelationName(dom.relation)},
                               {"spread_reference", dom.spread_a},
                               {"spread_alternative", dom.spread_b},
                               {"per_study_deltas", dom.per_study_deltas}};
    if (collection.size() == 2) {
      const Region region = ClassifyRegion(
          {utilities.values[0], utilities.values[1]},
          {alt_utilities.values[0], alt_utilities.values[1]});
      comparison["region"] = {
          {"label", RegionName(region)},
          {"reference", utilities.values},
          {"alternative", alt_utilities.values}};
      text << "  alternative rule region: " << RegionName(region) << '\n';
    }
    text << "  reference vs alternative: " << RelationName(dom.relation)
         << '\n';
    body["comparison"] = std::move(comparison);
  }

  const Schema& schema = collection.schema();
  if (resolved.rule.kind == DecisionRule::Kind::kThreshold &&
      schema.IsBinary() && schema.has_score) {
    Json thresholds = Json::array();
    for (const auto& study : collection.studies()) {
      thresholds.push_back(
          {{"study_id", study.id},
           {"threshold",
            Real(OptimalThresholdEmpirical(ScoredLabels(study), config.utility))}});
    }
    body["diagnostics"] = {{"per_study_optimal_thresholds", std::move(thresholds)},
                           {"note", kDiagnosticNote}};
  }

  report.outcome = all_replicable ? 0 : 1;
  Outcome(body, report.outcome,
          all_replicable ? "all requested verdicts replicable"
                         : "at least one verdict not replicable");
  text << (all_replicable ? "RESULT: replicable\n" : "RESULT: not replicable\n");
  report.text = text.str();
  report.files["utilities.csv"] = UtilitiesCsv(utilities);
  report.files["distances.csv"] = TableCsv(collection.StudyIds(), distances);
  return report;
}

Report RunTest(const AssessmentConfig& config) {
  const Loaded loaded = LoadAndRestrict(config);
  const StudyCollection& collection = loaded.collection;
  const ResolvedRule resolved = ResolveRule(config.rule, config, collection);
  const TestConfig& tc = config.test;
  const GroupStatistic statistic(collection, resolved.rule, config.utility,
                                 tc.statistic, config.distance_backend);
  TestResult result =
      PermutationTest(statistic, tc.permutations, config.seed, tc.adjust);
  result.study_ids = collection.StudyIds();

  Report report;
  report.command = "test";
  report.timestamp = Timestamp();
  Json& body = report.body;
  body = Header("test", config);
  body["collection"] = CollectionJson(loaded, config.restrict.has_value());
  body["rule"] = resolved.description;
  body["utility"] = UtilityJson(config.utility, collection.schema().label_set);
  const bool rejected = result.p_value <= tc.alpha;
  Json test;
  test["statistic"] = StatisticName(result.statistic);
  if (tc.statistic == Statistic::kMaxDistance) {
    test["backend"] = BackendName(config.distance_backend);
  }
  test["permutations"] = result.permutations;
  test["seed"] = result.seed;
  test["statistic_observed"] = result.statistic_observed;
  test["p_value"] = result.p_value;
  test["alpha"] = tc.alpha;
  test["replicability_rejected"] = rejected;
  test["adjust"] = AdjustmentName(result.adjust);
  test["scheme_note"] = kPermutationNote;
  if (result.adjust != Adjustment::kNone) {
    test["pairwise"] = {{"study_ids", result.study_ids},
                        {"observed", Table(result.pairwise_observed)},
                        {"p_value", Table(result.pairwise_p)},
                        {"p_adjusted", Table(result.pairwise_p_adjusted)},
                        {"dependence_note", kDependenceNote}};
  }
  if (tc.emit_null_draws) test["null_draws"] = result.null_draws;
  body["test"] = std::move(test);
  report.outcome = rejected ? 1 : 0;
  Outcome(body, report.outcome,
          rejected ? "replicability rejected at alpha"
                   : "replicability not rejected at alpha");

  std::ostringstream text;
  text << "replica test: " << StatisticName(result.statistic) << " over K="
       << collection.size() << " studies, " << result.permutations
       << " permutations (seed " << result.seed << ")\n"
       << "  observed " << Fixed(result.statistic_observed) << ", p = "
       << Fixed(result.p_value) << " (alpha " << Fixed(tc.alpha) << ")\n";
  if (result.adjust != Adjustment::kNone) {
    for (std::size_t i = 0; i < result.study_ids.size(); ++i) {
      for (std::size_t j = i + 1; j < result.study_ids.size(); ++j) {
        text << "  (" << result.study_ids[i] << ", " << result.study_ids[j]
             << "): observed " << Fixed(result.pairwise_observed[i][j])
             << ", p_adj = " << Fixed(result.pairwise_p_adjusted[i][j]) << '\n';
      }
    }
  }
  text << (rejected ? "RESULT: replicability rejected\n"
                    : "RESULT: replicability not rejected\n");
  report.text = text.str();
  return report;
}

Report RunResample(const AssessmentConfig& config) {
  const Loaded loaded = LoadAndRestrict(config);
  const StudyCollection& collection = loaded.collection;
  const ResolvedRule resolved = ResolveRule(config.rule, config, collection);
  const ResampleConfig& rc = config.resample;

  Report report;
  report.command = "resample";
  report.timestamp = Timestamp();
  Json& body = report.body;
  body = Header("resample", config);
  body["collection"] = CollectionJson(loaded, config.restrict.has_value());
  body["rule"] = resolved.description;
  body["utility"] = UtilityJson(config.utility, collection.schema().label_set);

  std::ostringstream text;
  text << "replica resample: " << SchemeName(rc.plan.scheme) << ", "
       << rc.plan.replicates << " replicates (seed " << rc.plan.seed << ")\n";
  Json resample;
  resample["scheme"] = SchemeName(rc.plan.scheme);
  resample["replicates"] = rc.plan.replicates;
  resample["seed"] = rc.plan.seed;

  if (rc.plan.scheme == ResamplePlan::Scheme::kWithinStudy) {
    const WithinBootstrapResult result = BootstrapWithin(
        collection, resolved.rule, config.utility, rc.plan, rc.level);
    resample["level"] = result.level;
    Json studies = Json::array();
    for (const auto& s : result.studies) {
      Json entry = {{"study_id", s.study_id},
                    {"observed", s.observed},
                    {"mean", s.mean},
                    {"variance", s.variance},
                    {"ci_low", s.ci_low},
                    {"ci_high", s.ci_high},
                    {"degenerate", s.degenerate}};
      if (rc.emit_statistics) entry["statistics"] = s.draws;
      studies.push_back(std::move(entry));
      text << "  " << s.study_id << ": U = " << Fixed(s.observed)
           << ", bootstrap var " << Fixed(s.variance) << ", "
           << Fixed(100 * result.level) << "% CI [" << Fixed(s.ci_low) << ", "
           << Fixed(s.ci_high) << "]" << (s.degenerate ? " (n=1)" : "")
           << '\n';
    }
    resample["studies"] = std::move(studies);
    resample["difference_variance"] = {{"study_ids", collection.StudyIds()},
                                       {"table", Table(result.difference_variance)}};
  } else {
    const GroupStatistic statistic(collection, resolved.rule, config.utility,
                                   rc.statistic, config.distance_backend);
    ResampleDistribution dist;
    if (rc.plan.scheme == ResamplePlan::Scheme::kCluster) {
      dist = ClusterBootstrap(statistic, rc.plan);
    } else {
      resample["gamma"] = rc.plan.gamma;
      dist = StudyStrapDistribution(statistic, rc.plan);
    }
    resample["statistic"] = StatisticName(rc.statistic);
    if (rc.statistic == Statistic::kMaxDistance) {
      resample["backend"] = BackendName(config.distance_backend);
    }
    resample["observed"] = dist.observed;
    resample["mean"] = dist.mean;
    resample["q025"] = dist.q025;
    resample["q50"] = dist.q50;
    resample["q975"] = dist.q975;
    text << "  " << StatisticName(rc.statistic) << ": observed "
         << Fixed(dist.observed) << ", resampled median " << Fixed(dist.q50)
         << ", 95% range [" << Fixed(dist.q025) << ", " << Fixed(dist.q975)
         << "]\n";
    if (rc.epsilon) {
      const double rate = EpsilonRate(dist.statistics, *rc.epsilon);
      resample["epsilon"] = *rc.epsilon;
      resample["epsilon_rate"] = rate;
      text << "  share of replicates epsilon-replicable at " << Fixed(*rc.epsilon)
           << ": " << Fixed(rate) << '\n';
    }
    if (rc.emit_statistics) resample["statistics"] = dist.statistics;
  }
  body["resample"] = std::move(resample);
  Outcome(body, 0, "resampling completed");
  report.text = text.str();
  return report;
}

Report RunBenchmark(const AssessmentConfig& config) {
  if (!config.benchmark.u0) {
    Fail(ErrorCode::kInvalidArgument, "benchmark needs benchmark.u0 (or --u0)");
  }
  const Loaded loaded = LoadAndRestrict(config);
  const StudyCollection& collection = loaded.collection;
  std::size_t index = 0;
  if (config.benchmark.study) {
    bool found = false;
    for (std::size_t k = 0; k < collection.size(); ++k) {
      if (collection.study(k).id == *config.benchmark.study) {
        index = k;
        found = true;
      }
    }
    if (!found) {
      Fail(ErrorCode::kInvalidArgument,
           "benchmark study '" + *config.benchmark.study + "' not found");
    }
  } else if (collection.size() != 1) {
    Fail(ErrorCode::kPrecondition,
         "benchmark compares a single study; set benchmark.study");
  }
  const Study& study = collection.study(index);
  const ResolvedRule resolved = ResolveRule(config.rule, config, collection);
  const BenchmarkSummary summary =
      BenchmarkCompare(study, resolved.rule, config.utility, *config.benchmark.u0,
                       collection.schema().NumLabels());

  Report report;
  report.command = "benchmark";
  report.timestamp = Timestamp();
  Json& body = report.body;
  body = Header("benchmark", config);
  body["collection"] = CollectionJson(loaded, config.restrict.has_value());
  body["rule"] = resolved.description;
  body["utility"] = UtilityJson(config.utility, collection.schema().label_set);

  const auto& per_unit = summary.per_unit;
  const double n = static_cast<double>(per_unit.size());
  double ss = 0.0;
  for (double u : per_unit) ss += (u - summary.mean_utility) * (u - summary.mean_utility);
  const double sd = per_unit.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  Json bench;
  bench["study_id"] = study.id;
  bench["n"] = study.size();
  bench["u0"] = *config.benchmark.u0;
  bench["mean_utility"] = summary.mean_utility;
  bench["gap"] = summary.gap;
  bench["per_unit_sd"] = sd;
  bench["per_unit_standard_error"] = sd / std::sqrt(n);
  bench["per_unit"] = per_unit;
  int outcome = 0;
  std::string meaning = "benchmark comparison completed";
  if (config.benchmark.epsilon) {
    const bool ok = WithinEpsilon(std::fabs(summary.gap), *config.benchmark.epsilon);
    bench["epsilon"] = *config.benchmark.epsilon;
    bench["replicable"] = ok;
    outcome = ok ? 0 : 1;
    meaning = ok ? "|gap| within epsilon" : "|gap| exceeds epsilon";
  }
  body["benchmark"] = std::move(bench);
  report.outcome = outcome;
  Outcome(body, outcome, meaning);

  std::ostringstream text;
  text << "replica benchmark: study " << study.id << " (n=" << study.size()
       << ")\n  U = " << Fixed(summary.mean_utility) << ", U0 = "
       << Fixed(*config.benchmark.u0) << ", gap = " << Fixed(summary.gap)
       << " (per-unit sd " << Fixed(sd) << ")\n";
  if (config.benchmark.epsilon) {
    text << (outcome == 0 ? "RESULT: within epsilon\n" : "RESULT: exceeds epsilon\n");
  }
  report.text = text.str();
  return report;
}

Report RunValidate(const AssessmentConfig& config) {
  const StudyCollection collection = LoadCollection(config.load);
  const ValidationReport validation = Validate(collection);

  Report report;
  report.command = "validate";
  report.timestamp = Timestamp();
  Json& body = report.body;
  body = Header("validate", config);
  Json studies = Json::array();
  std::ostringstream text;
  text << "replica validate: K=" << collection.size() << " studies\n";
  for (const auto& s : validation.studies) {
    Json entry = {{"id", s.id}, {"n", s.n}, {"label_frequencies", s.label_frequencies}};
    if (collection.schema().IsBinary()) entry["prevalence"] = s.label_frequencies[1];
    if (s.score_min) {
      entry["score_min"] = *s.score_min;
      entry["score_max"] = *s.score_max;
    }
    Json missing = Json::object();
    for (const auto& [name, count] : s.missing_counts) missing[name] = count;
    entry["missing_counts"] = std::move(missing);
    studies.push_back(std::move(entry));
    text << "  " << s.id << ": n=" << s.n;
    if (collection.schema().IsBinary()) {
      text << ", prevalence " << Fixed(s.label_frequencies[1]);
    }
    text << '\n';
  }
  Json flags = Json::array();
  for (const auto& f : validation.flags) {
    flags.push_back({{"study_id", f.study_id},
                     {"kind", f.kind},
                     {"message", f.message},
                     {"rows", f.rows}});
    text << "  FLAG " << f.study_id << ": " << f.kind << " (" << f.message << ")\n";
  }
  body["validation"] = {{"studies", std::move(studies)}, {"flags", std::move(flags)}};
  report.outcome = validation.flags.empty() ? 0 : 1;
  Outcome(body, report.outcome,
          validation.flags.empty() ? "no flags" : "validation flags raised");
  report.text = text.str();
  return report;
}

Report RunSimulate(const AssessmentConfig& config) {
  if (!config.simulate) {
    Fail(ErrorCode::kInvalidArgument, "simulate needs a 'simulate' section");
  }
  const CollectionSpec& spec = *config.simulate;
  const StudyCollection collection = Generate(spec);

  Report report;
  report.command = "simulate";
  report.timestamp = Timestamp();
  Json& body = report.body;
  body = Header("simulate", config);

  Json manifest;
  manifest["seed"] = config.seed;
  Json studies = Json::array();
  Json generated = Json::array();
  for (std::size_t k = 0; k < collection.size(); ++k) {
    const Study& study = collection.study(k);
    const std::string file = study.id + ".csv";
    report.files[file] = StudyToCsv(study, collection.schema());
    studies.push_back({{"id", study.id}, {"path", file}});
    long long positives = 0;
    for (const auto& u : study.units) positives += u.label;
    Json entry = {{"id", study.id},
                  {"n", study.size()},
                  {"file", file},
                  {"empirical_prevalence",
                   static_cast<double>(positives) / static_cast<double>(study.size())}};
    if (config.rule.kind == RuleConfig::Kind::kThreshold) {
      const ConfusionFrequencies f = ExactCellProbabilities(
          spec.studies[k], DecisionRule::Threshold(config.rule.threshold));
      entry["population_cells"] = {{"threshold", Real(config.rule.threshold)},
                                   {"f00", f.f00},
                                   {"f01", f.f01},
                                   {"f10", f.f10},
                                   {"f11", f.f11}};
    }
    generated.push_back(std::move(entry));
  }
  manifest["studies"] = std::move(studies);
  manifest["columns"] = {{"label", "label"}, {"score", "score"}};
  manifest["features"] = Json::array(
      {{{"name", kSourceStudyFeature}, {"type", "categorical"}}});
  manifest["label_set"] = {"0", "1"};
  manifest["score_is_probability"] = collection.schema().score_is_probability;
  for (const char* key : {"utility", "rule", "alternative_rule", "prevalence",
                          "definitions", "distance_backend", "resample", "test",
                          "benchmark"}) {
    if (auto it = config.raw.find(key); it != config.raw.end()) {
      manifest[key] = *it;
    }
  }
  report.files["manifest.json"] = manifest.dump(2) + "\n";

  body["simulate"] = {{"seed", spec.seed}, {"studies", std::move(generated)},
                      {"manifest", "manifest.json"}};
  Outcome(body, 0, "collection generated");
  std::ostringstream text;
  text << "replica simulate: " << collection.size() << " studies written (seed "
       << spec.seed << "), manifest.json ready for assess\n";
  report.text = text.str();
  return report;
}

void WriteReport(const Report& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    Fail(ErrorCode::kIo, "cannot create output directory '" + out_dir.string() +
                             "': " + ec.message());
  }
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream file(out_dir / name, std::ios::binary);
    file << content;
    if (!file) {
      Fail(ErrorCode::kIo, "cannot write '" + (out_dir / name).string() + "'");
    }
  };
  write("report.json", report.FullJson());
  write("report.txt", report.text);
  for (const auto& [name, content] : report.files) write(name, content);
}

}  // namespace replica

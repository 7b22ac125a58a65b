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

#include "config.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "error.h"

namespace replica {
namespace {

[[noreturn]] void Bad(const std::string& where, const std::string& what) {
  Fail(ErrorCode::kInvalidArgument, "config " + where + ": " + what);
}

const Json* Find(const Json& object, const char* key) {
  if (!object.is_object()) return nullptr;
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) return nullptr;
  return &*it;
}

double GetNumber(const Json& v, const std::string& where) {
  if (!v.is_number()) Bad(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) Bad(where, "expected a finite number");
  return d;
}

std::string GetString(const Json& v, const std::string& where) {
  if (!v.is_string()) Bad(where, "expected a string");
  return v.get<std::string>();
}

// Labels and categorical values may be written as numbers.
std::string GetScalarText(const Json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream out;
    out.precision(17);
    out << v.get<double>();
    return out.str();
  }
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  Bad(where, "expected a string or number");
}

int GetInt(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) Bad(where, "expected an integer");
  return v.get<int>();
}

bool GetBool(const Json& v, const std::string& where) {
  if (!v.is_boolean()) Bad(where, "expected true or false");
  return v.get<bool>();
}

std::uint64_t GetSeed(const Json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  Bad(where, "expected a non-negative integer seed");
}

double RealOrInfinity(const Json& v, const std::string& where) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "-inf") return -kInf;
    if (s == "inf" || s == "+inf") return kInf;
  }
  return GetNumber(v, where);
}

RuleConfig ParseRule(const Json& node, const std::string& where) {
  RuleConfig rule;
  const Json* kind = Find(node, "kind");
  const std::string name = kind ? GetString(*kind, where + ".kind") : "threshold";
  if (name == "identity") {
    rule.kind = RuleConfig::Kind::kIdentity;
  } else if (name == "threshold") {
    rule.kind = RuleConfig::Kind::kThreshold;
    const Json* t = Find(node, "threshold");
    if (!t) Bad(where, "threshold rule needs 'threshold'");
    rule.threshold = RealOrInfinity(*t, where + ".threshold");
  } else if (name == "optimal_closed_form") {
    rule.kind = RuleConfig::Kind::kOptimalClosedForm;
  } else if (name == "optimal_empirical") {
    rule.kind = RuleConfig::Kind::kOptimalEmpirical;
  } else {
    Bad(where + ".kind", "unknown rule kind '" + name + "'");
  }
  return rule;
}

UtilitySpec ParseUtility(const Json& node, const std::vector<std::string>& labels) {
  const Json* kind = Find(node, "kind");
  if (!kind) Bad("utility", "missing 'kind'");
  const std::string name = GetString(*kind, "utility.kind");
  if (name == "agreement") return UtilitySpec::Agreement();
  if (name == "alert_indicator") return UtilitySpec::AlertIndicator();
  if (name == "binary_error") {
    const Json* u01 = Find(node, "u01");
    const Json* u10 = Find(node, "u10");
    if (!u01 || !u10) Bad("utility", "binary_error needs u01 and u10");
    return UtilitySpec::BinaryError(GetNumber(*u01, "utility.u01"),
                                    GetNumber(*u10, "utility.u10"));
  }
  if (name == "table") {
    const Json* entries = Find(node, "entries");
    if (!entries || !entries->is_array()) {
      Bad("utility", "table needs an 'entries' array");
    }
    Schema lookup;
    lookup.label_set = labels;
    std::map<std::pair<Label, Label>, double> table;
    for (std::size_t i = 0; i < entries->size(); ++i) {
      const Json& e = (*entries)[i];
      const std::string where = "utility.entries[" + std::to_string(i) + "]";
      const Json* a = Find(e, "action");
      const Json* y = Find(e, "label");
      const Json* v = Find(e, "value");
      if (!a || !y || !v) Bad(where, "needs action, label and value");
      const Label action = lookup.LabelIndex(GetScalarText(*a, where));
      const Label label = lookup.LabelIndex(GetScalarText(*y, where));
      if (action < 0 || label < 0) Bad(where, "action or label not in label_set");
      table[{action, label}] = GetNumber(*v, where + ".value");
    }
    return UtilitySpec::Table(std::move(table),
                              static_cast<int>(labels.size()));
  }
  Bad("utility.kind", "unknown utility kind '" + name + "'");
}

FeatureValue ParseOperand(const Json& v, FeatureType type,
                          const std::string& where) {
  if (type == FeatureType::kNumeric) return GetNumber(v, where);
  return GetScalarText(v, where);
}

SubsetPredicate ParseRestrict(const Json& node,
                              const std::vector<FeatureSpec>& features) {
  if (!node.is_array()) Bad("restrict", "expected an array of conditions");
  SubsetPredicate predicate;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const Json& c = node[i];
    const std::string where = "restrict[" + std::to_string(i) + "]";
    const Json* feature = Find(c, "feature");
    const Json* op = Find(c, "op");
    if (!feature || !op) Bad(where, "needs 'feature' and 'op'");
    Condition condition;
    condition.feature = GetString(*feature, where + ".feature");
    condition.op = ParseComparator(GetString(*op, where + ".op"));
    FeatureType type = FeatureType::kCategorical;
    bool known = false;
    for (const auto& f : features) {
      if (f.name == condition.feature) {
        type = f.type;
        known = true;
      }
    }
    if (!known) {
      Fail(ErrorCode::kSchema, "predicate references unknown feature '" +
                                   condition.feature + "'");
    }
    if (condition.op == Comparator::kIn || condition.op == Comparator::kNotIn) {
      const Json* values = Find(c, "values");
      if (!values || !values->is_array()) Bad(where, "'in' needs 'values'");
      for (const auto& v : *values) {
        condition.values.push_back(ParseOperand(v, type, where + ".values"));
      }
    } else {
      const Json* value = Find(c, "value");
      if (!value) Bad(where, "needs 'value'");
      condition.values.push_back(ParseOperand(*value, type, where + ".value"));
    }
    predicate.conjuncts.push_back(std::move(condition));
  }
  return predicate;
}

ScoreModel ParseScoreModel(const Json& node, const std::string& where) {
  const Json* kind = Find(node, "kind");
  const std::string name = kind ? GetString(*kind, where + ".kind") : "beta";
  if (name == "beta") {
    const Json* mean = Find(node, "mean");
    const Json* conc = Find(node, "concentration");
    if (!mean || !conc) Bad(where, "beta needs mean and concentration");
    return ScoreModel::Beta(GetNumber(*mean, where + ".mean"),
                            GetNumber(*conc, where + ".concentration"));
  }
  if (name == "table") {
    const Json* values = Find(node, "values");
    const Json* probs = Find(node, "probabilities");
    if (!values || !probs || !values->is_array() || !probs->is_array()) {
      Bad(where, "table needs 'values' and 'probabilities' arrays");
    }
    std::vector<double> v;
    std::vector<double> p;
    for (const auto& x : *values) v.push_back(GetNumber(x, where + ".values"));
    for (const auto& x : *probs) p.push_back(GetNumber(x, where + ".probabilities"));
    return ScoreModel::Table(std::move(v), std::move(p));
  }
  Bad(where + ".kind", "unknown score model '" + name + "'");
}

void SetEverywhere(Json& raw, const Json& value) {
  if (auto it = raw.find("definitions"); it != raw.end() && it->is_array()) {
    for (auto& d : *it) {
      if (d.is_object()) d["epsilon"] = value;
    }
  }
  raw["resample"]["epsilon"] = value;
  raw["benchmark"]["epsilon"] = value;
}

}  // namespace

std::string RuleKindName(RuleConfig::Kind kind) {
  switch (kind) {
    case RuleConfig::Kind::kIdentity: return "identity";
    case RuleConfig::Kind::kThreshold: return "threshold";
    case RuleConfig::Kind::kOptimalClosedForm: return "optimal_closed_form";
    case RuleConfig::Kind::kOptimalEmpirical: return "optimal_empirical";
  }
  return "?";
}

Json ReadConfigJson(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) Fail(ErrorCode::kIo, "cannot read config '" + path.string() + "'");
  try {
    return Json::parse(file);
  } catch (const Json::parse_error& e) {
    Fail(ErrorCode::kParse, "config '" + path.string() + "': " + e.what());
  }
}

void ApplyOverride(Json& raw, const std::string& key, const std::string& value) {
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const Json::parse_error&) {
    parsed = value;
  }
  if (key == "epsilon") {
    SetEverywhere(raw, parsed);
    return;
  }
  Json* node = &raw;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) {
      Fail(ErrorCode::kInvalidArgument, "malformed override key '" + key + "'");
    }
    if (!node->is_object()) *node = Json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = parsed;
}

CollectionSpec ParseCollectionSpec(const Json& simulate, std::uint64_t seed) {
  CollectionSpec spec;
  spec.seed = seed;
  if (const Json* s = Find(simulate, "seed")) spec.seed = GetSeed(*s, "simulate.seed");
  const Json* studies = Find(simulate, "studies");
  if (!studies || !studies->is_array() || studies->empty()) {
    Bad("simulate", "needs a non-empty 'studies' array");
  }
  for (std::size_t i = 0; i < studies->size(); ++i) {
    const Json& node = (*studies)[i];
    const std::string where = "simulate.studies[" + std::to_string(i) + "]";
    StudySpec study;
    if (const Json* v = Find(node, "id")) study.id = GetString(*v, where + ".id");
    if (const Json* v = Find(node, "n")) study.n = GetInt(*v, where + ".n");
    if (const Json* v = Find(node, "prevalence")) {
      study.prevalence = GetNumber(*v, where + ".prevalence");
    }
    if (const Json* v = Find(node, "negative")) {
      study.negative = ParseScoreModel(*v, where + ".negative");
    }
    if (const Json* v = Find(node, "positive")) {
      study.positive = ParseScoreModel(*v, where + ".positive");
    }
    if (const Json* v = Find(node, "concept_flip")) {
      study.concept_flip = GetNumber(*v, where + ".concept_flip");
    }
    if (const Json* v = Find(node, "covariate_shift")) {
      study.covariate_shift = GetNumber(*v, where + ".covariate_shift");
    }
    study.Validate();
    spec.studies.push_back(std::move(study));
  }
  return spec;
}

AssessmentConfig ParseConfig(const Json& raw, const std::filesystem::path& base_dir) {
  if (!raw.is_object()) Bad("root", "expected a JSON object");
  AssessmentConfig config;
  config.raw = raw;
  config.base_dir = base_dir;

  if (const Json* v = Find(raw, "seed")) config.seed = GetSeed(*v, "seed");

  LoadConfig& load = config.load;
  if (const Json* labels = Find(raw, "label_set")) {
    if (!labels->is_array()) Bad("label_set", "expected an array");
    load.label_set.clear();
    for (const auto& l : *labels) load.label_set.push_back(GetScalarText(l, "label_set"));
  }
  if (const Json* columns = Find(raw, "columns")) {
    if (const Json* v = Find(*columns, "label")) {
      load.label_column = GetString(*v, "columns.label");
    }
    if (const Json* v = Find(*columns, "score")) {
      load.score_column = GetString(*v, "columns.score");
    }
    if (const Json* v = Find(*columns, "predicted_class")) {
      load.predicted_class_column = GetString(*v, "columns.predicted_class");
    }
  } else {
    load.score_column = "score";
  }
  if (const Json* v = Find(raw, "score_is_probability")) {
    load.score_is_probability = GetBool(*v, "score_is_probability");
  }
  if (const Json* features = Find(raw, "features")) {
    if (!features->is_array()) Bad("features", "expected an array");
    for (const auto& f : *features) {
      const Json* name = Find(f, "name");
      if (!name) Bad("features", "every feature needs a 'name'");
      FeatureSpec spec;
      spec.name = GetString(*name, "features.name");
      const Json* type = Find(f, "type");
      const std::string t = type ? GetString(*type, "features.type") : "numeric";
      if (t == "numeric") {
        spec.type = FeatureType::kNumeric;
      } else if (t == "categorical") {
        spec.type = FeatureType::kCategorical;
      } else {
        Bad("features.type", "expected numeric or categorical");
      }
      load.features.push_back(spec);
    }
  }
  if (const Json* studies = Find(raw, "studies")) {
    if (!studies->is_array()) Bad("studies", "expected an array");
    for (std::size_t i = 0; i < studies->size(); ++i) {
      const Json& s = (*studies)[i];
      const std::string where = "studies[" + std::to_string(i) + "]";
      StudySource source;
      const Json* path = Find(s, "path");
      if (!path) Bad(where, "needs a 'path'");
      std::filesystem::path p = GetString(*path, where + ".path");
      if (p.is_relative()) p = base_dir / p;
      source.path = p.lexically_normal().string();
      if (const Json* id = Find(s, "id")) source.id = GetString(*id, where + ".id");
      if (const Json* fmt = Find(s, "format")) {
        const std::string f = GetString(*fmt, where + ".format");
        if (f == "csv") {
          source.format = FileFormat::kCsv;
        } else if (f == "jsonl") {
          source.format = FileFormat::kJsonLines;
        } else {
          Bad(where + ".format", "expected csv or jsonl");
        }
      }
      if (const Json* meta = Find(s, "metadata")) {
        if (!meta->is_object()) Bad(where + ".metadata", "expected an object");
        for (const auto& [k, v] : meta->items()) {
          source.metadata[k] = GetScalarText(v, where + ".metadata");
        }
      }
      load.studies.push_back(std::move(source));
    }
  }

  if (const Json* r = Find(raw, "restrict")) {
    config.restrict = ParseRestrict(*r, load.features);
  }
  if (const Json* u = Find(raw, "utility")) {
    config.utility = ParseUtility(*u, load.label_set);
  }
  if (const Json* r = Find(raw, "rule")) config.rule = ParseRule(*r, "rule");
  if (const Json* r = Find(raw, "alternative_rule")) {
    config.alternative_rule = ParseRule(*r, "alternative_rule");
  }
  if (const Json* p = Find(raw, "prevalence")) {
    const Json* source = Find(*p, "source");
    const std::string s =
        source ? GetString(*source, "prevalence.source") : "empirical_pooled";
    if (s == "user_specified") {
      config.prevalence.source = Prevalence::Source::kUserSpecified;
      const Json* value = Find(*p, "value");
      if (!value) Bad("prevalence", "user_specified needs 'value'");
      config.prevalence.value = GetNumber(*value, "prevalence.value");
      Prevalence::Make(*config.prevalence.value, config.prevalence.source);
    } else if (s == "empirical_pooled") {
      config.prevalence.source = Prevalence::Source::kEmpiricalPooled;
    } else if (s == "empirical_per_study") {
      config.prevalence.source = Prevalence::Source::kEmpiricalPerStudy;
      const Json* study = Find(*p, "study");
      if (!study) Bad("prevalence", "empirical_per_study needs 'study'");
      config.prevalence.study = GetString(*study, "prevalence.study");
    } else {
      Bad("prevalence.source", "unknown source '" + s + "'");
    }
  }
  if (const Json* b = Find(raw, "distance_backend")) {
    config.distance_backend = ParseBackend(GetString(*b, "distance_backend"));
  }
  if (const Json* defs = Find(raw, "definitions")) {
    if (!defs->is_array()) Bad("definitions", "expected an array");
    for (std::size_t i = 0; i < defs->size(); ++i) {
      const Json& d = (*defs)[i];
      const std::string where = "definitions[" + std::to_string(i) + "]";
      DefinitionRequest request;
      const Json* kind = Find(d, "kind");
      if (!kind) Bad(where, "needs 'kind'");
      const std::string k = GetString(*kind, where + ".kind");
      if (k == "absolute") {
        request.definition = Definition::kAbsolute;
      } else if (k == "relative") {
        request.definition = Definition::kRelative;
      } else if (k == "distance") {
        request.definition = Definition::kDistance;
      } else {
        Bad(where + ".kind", "unknown definition '" + k + "'");
      }
      const Json* eps = Find(d, "epsilon");
      if (!eps) Bad(where, "needs 'epsilon'");
      request.epsilon = GetNumber(*eps, where + ".epsilon");
      if (request.epsilon < 0.0) Bad(where + ".epsilon", "must be >= 0");
      request.backend = config.distance_backend;
      if (const Json* b = Find(d, "backend")) {
        request.backend = ParseBackend(GetString(*b, where + ".backend"));
      }
      config.definitions.push_back(request);
    }
  }
  if (const Json* r = Find(raw, "resample")) {
    ResampleConfig& rc = config.resample;
    if (const Json* v = Find(*r, "scheme")) {
      rc.plan.scheme = ParseScheme(GetString(*v, "resample.scheme"));
    }
    if (const Json* v = Find(*r, "replicates")) {
      rc.plan.replicates = GetInt(*v, "resample.replicates");
    }
    if (const Json* v = Find(*r, "gamma")) rc.plan.gamma = GetNumber(*v, "resample.gamma");
    if (const Json* v = Find(*r, "statistic")) {
      rc.statistic = ParseStatistic(GetString(*v, "resample.statistic"));
    }
    if (const Json* v = Find(*r, "epsilon")) {
      rc.epsilon = GetNumber(*v, "resample.epsilon");
      if (*rc.epsilon < 0.0) Bad("resample.epsilon", "must be >= 0");
    }
    if (const Json* v = Find(*r, "level")) rc.level = GetNumber(*v, "resample.level");
    if (const Json* v = Find(*r, "emit_statistics")) {
      rc.emit_statistics = GetBool(*v, "resample.emit_statistics");
    }
  }
  config.resample.plan.seed = config.seed;
  config.resample.plan.Validate();
  if (const Json* t = Find(raw, "test")) {
    TestConfig& tc = config.test;
    if (const Json* v = Find(*t, "statistic")) {
      tc.statistic = ParseStatistic(GetString(*v, "test.statistic"));
    }
    if (const Json* v = Find(*t, "permutations")) {
      tc.permutations = GetInt(*v, "test.permutations");
      if (tc.permutations < 1) Bad("test.permutations", "must be >= 1");
    }
    if (const Json* v = Find(*t, "adjust")) {
      tc.adjust = ParseAdjustment(GetString(*v, "test.adjust"));
    }
    if (const Json* v = Find(*t, "alpha")) tc.alpha = GetNumber(*v, "test.alpha");
    if (const Json* v = Find(*t, "emit_null_draws")) {
      tc.emit_null_draws = GetBool(*v, "test.emit_null_draws");
    }
  }
  if (const Json* b = Find(raw, "benchmark")) {
    if (const Json* v = Find(*b, "u0")) config.benchmark.u0 = GetNumber(*v, "benchmark.u0");
    if (const Json* v = Find(*b, "study")) {
      config.benchmark.study = GetString(*v, "benchmark.study");
    }
    if (const Json* v = Find(*b, "epsilon")) {
      config.benchmark.epsilon = GetNumber(*v, "benchmark.epsilon");
    }
  }
  if (const Json* s = Find(raw, "simulate")) {
    config.simulate = ParseCollectionSpec(*s, config.seed);
  }
  return config;
}

}  // namespace replica

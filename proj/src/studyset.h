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

// Multi-study data model: units, studies, collections, and the subset
// predicates used to restrict a collection to part of the feature space.

#ifndef REPLICA_STUDYSET_H_
#define REPLICA_STUDYSET_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace replica {

// Index into the collection's declared label set. Actions share the same
// index space; in the binary configuration index 1 is the positive class.
using Label = int;

enum class FeatureType { kNumeric, kCategorical };

// std::monostate marks a missing cell.
using FeatureValue = std::variant<std::monostate, double, std::string>;

inline bool IsMissing(const FeatureValue& v) {
  return std::holds_alternative<std::monostate>(v);
}

struct FeatureSpec {
  std::string name;
  FeatureType type = FeatureType::kNumeric;

  bool operator==(const FeatureSpec&) const = default;
};

struct Unit {
  std::vector<FeatureValue> features;  // aligned with Schema::features
  Label label = 0;
  std::optional<double> score;
  std::optional<Label> predicted_class;

  bool operator==(const Unit&) const = default;
};

struct Study {
  std::string id;
  std::vector<Unit> units;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return units.size(); }
  bool operator==(const Study&) const = default;
};

struct Schema {
  std::vector<FeatureSpec> features;
  std::vector<std::string> label_set = {"0", "1"};
  bool has_score = false;
  bool has_predicted_class = false;
  bool score_is_probability = false;

  bool IsBinary() const { return label_set.size() == 2; }
  int NumLabels() const { return static_cast<int>(label_set.size()); }
  // -1 when absent.
  int FeatureIndex(const std::string& name) const;
  // -1 when absent.
  Label LabelIndex(const std::string& value) const;

  bool operator==(const Schema&) const = default;
};

// Immutable after construction; the constructor enforces the collection
// invariants (K >= 1, n_k >= 1, distinct ids, schema conformance).
class StudyCollection {
 public:
  StudyCollection(Schema schema, std::vector<Study> studies);

  const Schema& schema() const { return schema_; }
  const std::vector<Study>& studies() const { return studies_; }
  const Study& study(std::size_t k) const { return studies_.at(k); }
  std::size_t size() const { return studies_.size(); }
  std::size_t TotalUnits() const;
  std::vector<std::string> StudyIds() const;

  bool operator==(const StudyCollection&) const = default;

 private:
  Schema schema_;
  std::vector<Study> studies_;
};

// ---------------------------------------------------------------------------
// Loading.

enum class FileFormat { kCsv, kJsonLines };

struct StudySource {
  std::string id;
  std::string path;
  std::optional<FileFormat> format;  // inferred from the extension if unset
  std::map<std::string, std::string> metadata;
};

// Column bindings and label declarations shared by every study file.
struct LoadConfig {
  std::vector<StudySource> studies;
  std::string label_column = "label";
  std::optional<std::string> score_column;
  std::optional<std::string> predicted_class_column;
  std::vector<FeatureSpec> features;  // column name == feature name
  std::vector<std::string> label_set = {"0", "1"};
  bool score_is_probability = false;
};

// Cells equal to "", "NA", "NaN" or "null" are treated as missing.
bool IsMissingToken(const std::string& cell);

StudyCollection LoadCollection(const LoadConfig& config);

// Parses one study from in-memory text; `name` is used in error messages.
Study ParseStudy(const std::string& text, FileFormat format,
                 const LoadConfig& config, const Schema& schema,
                 const std::string& id, const std::string& name);

Schema SchemaFromConfig(const LoadConfig& config);

// Writes a study in the CSV layout accepted by LoadCollection: features
// first, then score / predicted_class, then label. Reals use 17 significant
// digits so a reload reproduces the same doubles.
std::string StudyToCsv(const Study& study, const Schema& schema,
                       const std::string& label_column = "label",
                       const std::string& score_column = "score",
                       const std::string& predicted_column = "predicted_class");

// ---------------------------------------------------------------------------
// Restriction to a subset of the feature space.

enum class Comparator { kEq, kNe, kLt, kLe, kGt, kGe, kIn, kNotIn };

struct Condition {
  std::string feature;
  Comparator op = Comparator::kEq;
  // Single operand for the scalar comparators, the set for kIn / kNotIn.
  std::vector<FeatureValue> values;
};

struct SubsetPredicate {
  std::vector<Condition> conjuncts;
};

Comparator ParseComparator(const std::string& op);
std::string ComparatorName(Comparator op);

// The complement of a single atomic condition.
Condition Negate(const Condition& condition);

struct RestrictResult {
  StudyCollection collection;
  std::vector<std::string> dropped_studies;
};

// Throws kPrecondition on an empty restriction and kSchema on unknown
// features, type mismatches, or a predicate touching a missing value.
RestrictResult Restrict(const StudyCollection& collection,
                        const SubsetPredicate& predicate);

// ---------------------------------------------------------------------------
// Validation.

struct StudySummary {
  std::string id;
  std::size_t n = 0;
  std::vector<double> label_frequencies;  // one per declared label
  std::optional<double> score_min;
  std::optional<double> score_max;
  std::map<std::string, std::size_t> missing_counts;
};

struct ValidationFlag {
  std::string study_id;
  std::string kind;  // "prevalence 0", "prevalence 1", "score out of range"
  std::string message;
  std::vector<std::size_t> rows;  // 0-based unit indices, when applicable
};

struct ValidationReport {
  std::vector<StudySummary> studies;
  std::vector<ValidationFlag> flags;
};

ValidationReport Validate(const StudyCollection& collection);

}  // namespace replica

#endif  // REPLICA_STUDYSET_H_

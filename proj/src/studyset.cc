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

#include "studyset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "error.h"
#include "json.hpp"

namespace replica {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::optional<double> ParseDouble(const std::string& cell) {
  const std::string s = Trim(cell);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string FormatReal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Splits one CSV record, honouring double-quoted fields. Records never span
// lines.
std::vector<std::string> SplitCsvLine(const std::string& line,
                                      const std::string& name,
                                      std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (quoted) {
    Fail(ErrorCode::kParse, name + ": unterminated quote at line " +
                                std::to_string(line_no));
  }
  cells.push_back(cell);
  return cells;
}

std::string QuoteCsv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

FileFormat InferFormat(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") {
    return FileFormat::kJsonLines;
  }
  return FileFormat::kCsv;
}

// A record is a lookup from column name to raw cell text; nullopt means the
// column is absent from the record entirely.
class Record {
 public:
  virtual ~Record() = default;
  virtual std::optional<std::string> Get(const std::string& column) const = 0;
};

class CsvRecord : public Record {
 public:
  CsvRecord(const std::map<std::string, std::size_t>& header,
            const std::vector<std::string>& cells)
      : header_(header), cells_(cells) {}

  std::optional<std::string> Get(const std::string& column) const override {
    const auto it = header_.find(column);
    if (it == header_.end()) return std::nullopt;
    return cells_[it->second];
  }

 private:
  const std::map<std::string, std::size_t>& header_;
  const std::vector<std::string>& cells_;
};

class JsonRecord : public Record {
 public:
  explicit JsonRecord(const nlohmann::json& object) : object_(object) {}

  std::optional<std::string> Get(const std::string& column) const override {
    const auto it = object_.find(column);
    if (it == object_.end()) return std::nullopt;
    const auto& v = *it;
    if (v.is_null()) return std::string();
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return std::string(v.get<bool>() ? "1" : "0");
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::fabs(d) < 1e15) {
        return std::to_string(static_cast<long long>(d));
      }
      return FormatReal(d);
    }
    return v.dump();
  }

 private:
  const nlohmann::json& object_;
};

struct RowContext {
  const std::string& name;
  std::size_t row;  // 1-based data row
};

[[noreturn]] void FailAt(ErrorCode code, const RowContext& at,
                         const std::string& column, const std::string& what) {
  Fail(code, at.name + ": row " + std::to_string(at.row) + ", column '" +
                 column + "': " + what);
}

Label MatchLabel(const Schema& schema, const std::string& cell,
                 const RowContext& at, const std::string& column) {
  const Label idx = schema.LabelIndex(Trim(cell));
  if (idx < 0) {
    FailAt(ErrorCode::kSchema, at, column,
           "label outside declared set: '" + cell + "'");
  }
  return idx;
}

Unit ParseUnit(const Record& record, const LoadConfig& config,
               const Schema& schema, const RowContext& at) {
  Unit unit;
  const auto label = record.Get(config.label_column);
  if (!label) FailAt(ErrorCode::kSchema, at, config.label_column, "missing");
  if (IsMissingToken(Trim(*label))) {
    FailAt(ErrorCode::kSchema, at, config.label_column, "missing label");
  }
  unit.label = MatchLabel(schema, *label, at, config.label_column);

  if (config.score_column) {
    const auto cell = record.Get(*config.score_column);
    if (!cell) FailAt(ErrorCode::kSchema, at, *config.score_column, "missing");
    if (!IsMissingToken(Trim(*cell))) {
      const auto v = ParseDouble(*cell);
      if (!v || !std::isfinite(*v)) {
        FailAt(ErrorCode::kParse, at, *config.score_column,
               "unparseable score '" + *cell + "'");
      }
      unit.score = *v;
    }
  }
  if (config.predicted_class_column) {
    const auto cell = record.Get(*config.predicted_class_column);
    if (!cell) {
      FailAt(ErrorCode::kSchema, at, *config.predicted_class_column,
             "missing");
    }
    if (!IsMissingToken(Trim(*cell))) {
      unit.predicted_class =
          MatchLabel(schema, *cell, at, *config.predicted_class_column);
    }
  }
  if (!unit.score && !unit.predicted_class) {
    FailAt(ErrorCode::kSchema, at,
           config.score_column.value_or(
               config.predicted_class_column.value_or("")),
           "unit has neither a score nor a predicted class");
  }

  unit.features.reserve(config.features.size());
  for (const auto& feature : config.features) {
    const auto cell = record.Get(feature.name);
    if (!cell) FailAt(ErrorCode::kSchema, at, feature.name, "missing");
    const std::string text = Trim(*cell);
    if (IsMissingToken(text)) {
      unit.features.emplace_back(std::monostate{});
    } else if (feature.type == FeatureType::kNumeric) {
      const auto v = ParseDouble(text);
      if (!v) {
        FailAt(ErrorCode::kParse, at, feature.name,
               "unparseable numeric cell '" + *cell + "'");
      }
      unit.features.emplace_back(*v);
    } else {
      unit.features.emplace_back(text);
    }
  }
  return unit;
}

bool Compare(const FeatureValue& lhs, Comparator op, const FeatureValue& rhs) {
  switch (op) {
    case Comparator::kEq:
      return lhs == rhs;
    case Comparator::kNe:
      return lhs != rhs;
    case Comparator::kLt:
      return std::get<double>(lhs) < std::get<double>(rhs);
    case Comparator::kLe:
      return std::get<double>(lhs) <= std::get<double>(rhs);
    case Comparator::kGt:
      return std::get<double>(lhs) > std::get<double>(rhs);
    case Comparator::kGe:
      return std::get<double>(lhs) >= std::get<double>(rhs);
    default:
      break;
  }
  Fail(ErrorCode::kInternal, "set comparator used as scalar");
}

struct BoundCondition {
  int index;
  const Condition* condition;
};

std::vector<BoundCondition> BindPredicate(const Schema& schema,
                                          const SubsetPredicate& predicate) {
  std::vector<BoundCondition> bound;
  for (const auto& c : predicate.conjuncts) {
    const int index = schema.FeatureIndex(c.feature);
    if (index < 0) {
      Fail(ErrorCode::kSchema,
           "predicate references unknown feature '" + c.feature + "'");
    }
    const bool numeric = schema.features[index].type == FeatureType::kNumeric;
    const bool ordered = c.op == Comparator::kLt || c.op == Comparator::kLe ||
                         c.op == Comparator::kGt || c.op == Comparator::kGe;
    const bool is_set = c.op == Comparator::kIn || c.op == Comparator::kNotIn;
    if (ordered && !numeric) {
      Fail(ErrorCode::kSchema, "comparator " + ComparatorName(c.op) +
                                   " needs a numeric feature, '" + c.feature +
                                   "' is categorical");
    }
    if (!is_set && c.values.size() != 1) {
      Fail(ErrorCode::kInvalidArgument,
           "comparator " + ComparatorName(c.op) + " takes exactly one value");
    }
    if (is_set && c.values.empty()) {
      Fail(ErrorCode::kInvalidArgument, "empty value set for '" + c.feature +
                                            "'");
    }
    for (const auto& v : c.values) {
      const bool ok = numeric ? std::holds_alternative<double>(v)
                              : std::holds_alternative<std::string>(v);
      if (!ok) {
        Fail(ErrorCode::kSchema,
             "operand type does not match feature '" + c.feature + "'");
      }
    }
    bound.push_back({index, &c});
  }
  return bound;
}

bool Satisfies(const Unit& unit, const std::vector<BoundCondition>& bound,
               const std::string& study_id, std::size_t row) {
  for (const auto& [index, c] : bound) {
    const FeatureValue& value = unit.features[index];
    if (IsMissing(value)) {
      Fail(ErrorCode::kSchema, "study '" + study_id + "', row " +
                                   std::to_string(row + 1) +
                                   ": predicate touches missing feature '" +
                                   c->feature + "'");
    }
    bool ok;
    if (c->op == Comparator::kIn || c->op == Comparator::kNotIn) {
      const bool member =
          std::find(c->values.begin(), c->values.end(), value) !=
          c->values.end();
      ok = (c->op == Comparator::kIn) == member;
    } else {
      ok = Compare(value, c->op, c->values.front());
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

int Schema::FeatureIndex(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Label Schema::LabelIndex(const std::string& value) const {
  for (std::size_t i = 0; i < label_set.size(); ++i) {
    if (label_set[i] == value) return static_cast<Label>(i);
  }
  // "1.0" matches a declared "1".
  const auto numeric = ParseDouble(value);
  if (!numeric) return -1;
  for (std::size_t i = 0; i < label_set.size(); ++i) {
    const auto declared = ParseDouble(label_set[i]);
    if (declared && *declared == *numeric) return static_cast<Label>(i);
  }
  return -1;
}

StudyCollection::StudyCollection(Schema schema, std::vector<Study> studies)
    : schema_(std::move(schema)), studies_(std::move(studies)) {
  if (studies_.empty()) {
    Fail(ErrorCode::kInvalidArgument, "a collection needs at least one study");
  }
  if (schema_.label_set.size() < 2) {
    Fail(ErrorCode::kSchema, "label set needs at least two values");
  }
  std::set<std::string> ids;
  for (const auto& study : studies_) {
    if (!ids.insert(study.id).second) {
      Fail(ErrorCode::kSchema, "duplicate study id '" + study.id + "'");
    }
    if (study.units.empty()) {
      Fail(ErrorCode::kInvalidArgument, "study '" + study.id + "' is empty");
    }
    for (const auto& unit : study.units) {
      if (unit.features.size() != schema_.features.size()) {
        Fail(ErrorCode::kSchema,
             "study '" + study.id + "' does not conform to the schema");
      }
      if (unit.label < 0 || unit.label >= schema_.NumLabels()) {
        Fail(ErrorCode::kSchema,
             "study '" + study.id + "': label outside declared set");
      }
      if (unit.predicted_class && (*unit.predicted_class < 0 ||
                                   *unit.predicted_class >=
                                       schema_.NumLabels())) {
        Fail(ErrorCode::kSchema,
             "study '" + study.id + "': predicted class outside label set");
      }
      if (!unit.score && !unit.predicted_class) {
        Fail(ErrorCode::kSchema, "study '" + study.id +
                                     "': unit without score or prediction");
      }
    }
  }
}

std::size_t StudyCollection::TotalUnits() const {
  std::size_t total = 0;
  for (const auto& s : studies_) total += s.size();
  return total;
}

std::vector<std::string> StudyCollection::StudyIds() const {
  std::vector<std::string> ids;
  ids.reserve(studies_.size());
  for (const auto& s : studies_) ids.push_back(s.id);
  return ids;
}

bool IsMissingToken(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "null";
}

Schema SchemaFromConfig(const LoadConfig& config) {
  Schema schema;
  schema.features = config.features;
  schema.label_set = config.label_set;
  schema.has_score = config.score_column.has_value();
  schema.has_predicted_class = config.predicted_class_column.has_value();
  schema.score_is_probability = config.score_is_probability;
  if (!schema.has_score && !schema.has_predicted_class) {
    Fail(ErrorCode::kInvalidArgument,
         "bind at least one of the score / predicted class columns");
  }
  std::set<std::string> labels(config.label_set.begin(),
                               config.label_set.end());
  if (labels.size() != config.label_set.size() || labels.size() < 2) {
    Fail(ErrorCode::kSchema, "label set needs at least two distinct values");
  }
  return schema;
}

Study ParseStudy(const std::string& text, FileFormat format,
                 const LoadConfig& config, const Schema& schema,
                 const std::string& id, const std::string& name) {
  Study study;
  study.id = id;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (format == FileFormat::kCsv) {
    std::map<std::string, std::size_t> header;
    while (std::getline(in, line)) {
      ++line_no;
      if (!Trim(line).empty()) break;
    }
    if (Trim(line).empty()) {
      Fail(ErrorCode::kInvalidArgument, name + ": empty file");
    }
    const auto columns = SplitCsvLine(line, name, line_no);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      header.emplace(Trim(columns[i]), i);
    }
    auto require = [&](const std::string& column) {
      if (!header.count(column)) {
        Fail(ErrorCode::kSchema,
             name + ": missing declared column '" + column + "'");
      }
    };
    require(config.label_column);
    if (config.score_column) require(*config.score_column);
    if (config.predicted_class_column) require(*config.predicted_class_column);
    for (const auto& f : config.features) require(f.name);

    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (Trim(line).empty()) continue;
      ++row;
      auto cells = SplitCsvLine(line, name, line_no);
      if (cells.size() != columns.size()) {
        Fail(ErrorCode::kParse, name + ": row " + std::to_string(row) +
                                    " has " + std::to_string(cells.size()) +
                                    " cells, header has " +
                                    std::to_string(columns.size()));
      }
      CsvRecord record(header, cells);
      study.units.push_back(ParseUnit(record, config, schema, {name, row}));
    }
  } else {
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (Trim(line).empty()) continue;
      ++row;
      nlohmann::json object;
      try {
        object = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        Fail(ErrorCode::kParse,
             name + ": row " + std::to_string(row) + ": " + e.what());
      }
      if (!object.is_object()) {
        Fail(ErrorCode::kParse,
             name + ": row " + std::to_string(row) + " is not an object");
      }
      JsonRecord record(object);
      study.units.push_back(ParseUnit(record, config, schema, {name, row}));
    }
  }
  if (study.units.empty()) {
    Fail(ErrorCode::kInvalidArgument, name + ": empty file (no units)");
  }
  return study;
}

StudyCollection LoadCollection(const LoadConfig& config) {
  const Schema schema = SchemaFromConfig(config);
  if (config.studies.empty()) {
    Fail(ErrorCode::kInvalidArgument, "no studies listed");
  }
  std::vector<Study> studies;
  std::set<std::string> ids;
  for (const auto& source : config.studies) {
    const std::string id =
        source.id.empty() ? std::filesystem::path(source.path).stem().string()
                          : source.id;
    if (!ids.insert(id).second) {
      Fail(ErrorCode::kSchema, "duplicate study id '" + id + "'");
    }
    std::ifstream file(source.path, std::ios::binary);
    if (!file) {
      Fail(ErrorCode::kIo, "cannot read study file '" + source.path + "'");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    Study study = ParseStudy(buffer.str(),
                             source.format.value_or(InferFormat(source.path)),
                             config, schema, id, source.path);
    study.metadata = source.metadata;
    studies.push_back(std::move(study));
  }
  return StudyCollection(schema, std::move(studies));
}

std::string StudyToCsv(const Study& study, const Schema& schema,
                       const std::string& label_column,
                       const std::string& score_column,
                       const std::string& predicted_column) {
  std::ostringstream out;
  std::vector<std::string> header;
  for (const auto& f : schema.features) header.push_back(QuoteCsv(f.name));
  if (schema.has_score) header.push_back(score_column);
  if (schema.has_predicted_class) header.push_back(predicted_column);
  header.push_back(label_column);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (const auto& unit : study.units) {
    bool first = true;
    auto emit = [&](const std::string& cell) {
      out << (first ? "" : ",") << cell;
      first = false;
    };
    for (const auto& v : unit.features) {
      if (IsMissing(v)) {
        emit("");
      } else if (const double* d = std::get_if<double>(&v)) {
        emit(FormatReal(*d));
      } else {
        emit(QuoteCsv(std::get<std::string>(v)));
      }
    }
    if (schema.has_score) emit(unit.score ? FormatReal(*unit.score) : "");
    if (schema.has_predicted_class) {
      emit(unit.predicted_class
               ? QuoteCsv(schema.label_set[*unit.predicted_class])
               : "");
    }
    emit(QuoteCsv(schema.label_set[unit.label]));
    out << '\n';
  }
  return out.str();
}

Comparator ParseComparator(const std::string& op) {
  static const std::map<std::string, Comparator> kOps = {
      {"=", Comparator::kEq},   {"==", Comparator::kEq},
      {"!=", Comparator::kNe},  {"<", Comparator::kLt},
      {"<=", Comparator::kLe},  {">", Comparator::kGt},
      {">=", Comparator::kGe},  {"in", Comparator::kIn},
      {"not_in", Comparator::kNotIn}};
  const auto it = kOps.find(op);
  if (it == kOps.end()) {
    Fail(ErrorCode::kInvalidArgument, "unknown comparator '" + op + "'");
  }
  return it->second;
}

std::string ComparatorName(Comparator op) {
  switch (op) {
    case Comparator::kEq: return "=";
    case Comparator::kNe: return "!=";
    case Comparator::kLt: return "<";
    case Comparator::kLe: return "<=";
    case Comparator::kGt: return ">";
    case Comparator::kGe: return ">=";
    case Comparator::kIn: return "in";
    case Comparator::kNotIn: return "not_in";
  }
  return "?";
}

Condition Negate(const Condition& condition) {
  Condition out = condition;
  switch (condition.op) {
    case Comparator::kEq: out.op = Comparator::kNe; break;
    case Comparator::kNe: out.op = Comparator::kEq; break;
    case Comparator::kLt: out.op = Comparator::kGe; break;
    case Comparator::kLe: out.op = Comparator::kGt; break;
    case Comparator::kGt: out.op = Comparator::kLe; break;
    case Comparator::kGe: out.op = Comparator::kLt; break;
    case Comparator::kIn: out.op = Comparator::kNotIn; break;
    case Comparator::kNotIn: out.op = Comparator::kIn; break;
  }
  return out;
}

RestrictResult Restrict(const StudyCollection& collection,
                        const SubsetPredicate& predicate) {
  const auto bound = BindPredicate(collection.schema(), predicate);
  std::vector<Study> kept;
  std::vector<std::string> dropped;
  for (const auto& study : collection.studies()) {
    Study restricted;
    restricted.id = study.id;
    restricted.metadata = study.metadata;
    for (std::size_t i = 0; i < study.units.size(); ++i) {
      if (Satisfies(study.units[i], bound, study.id, i)) {
        restricted.units.push_back(study.units[i]);
      }
    }
    if (restricted.units.empty()) {
      dropped.push_back(study.id);
    } else {
      kept.push_back(std::move(restricted));
    }
  }
  if (kept.empty()) {
    Fail(ErrorCode::kPrecondition,
         "empty restriction: no unit in any study satisfies the predicate");
  }
  return {StudyCollection(collection.schema(), std::move(kept)),
          std::move(dropped)};
}

ValidationReport Validate(const StudyCollection& collection) {
  const Schema& schema = collection.schema();
  ValidationReport report;
  for (const auto& study : collection.studies()) {
    StudySummary summary;
    summary.id = study.id;
    summary.n = study.size();
    std::vector<std::size_t> label_counts(schema.label_set.size(), 0);
    std::vector<std::size_t> out_of_range;
    for (std::size_t i = 0; i < study.units.size(); ++i) {
      const Unit& unit = study.units[i];
      ++label_counts[unit.label];
      if (unit.score) {
        const double s = *unit.score;
        summary.score_min = std::min(summary.score_min.value_or(s), s);
        summary.score_max = std::max(summary.score_max.value_or(s), s);
        if (schema.score_is_probability && (s < 0.0 || s > 1.0)) {
          out_of_range.push_back(i);
        }
      }
      for (std::size_t f = 0; f < schema.features.size(); ++f) {
        if (IsMissing(unit.features[f])) {
          ++summary.missing_counts[schema.features[f].name];
        }
      }
    }
    for (std::size_t c : label_counts) {
      summary.label_frequencies.push_back(static_cast<double>(c) /
                                          static_cast<double>(summary.n));
    }
    if (schema.IsBinary()) {
      if (label_counts[1] == 0) {
        report.flags.push_back({study.id, "prevalence 0",
                                "no positive labels; sensitivity undefined",
                                {}});
      } else if (label_counts[0] == 0) {
        report.flags.push_back({study.id, "prevalence 1",
                                "no negative labels; specificity undefined",
                                {}});
      }
    }
    if (!out_of_range.empty()) {
      report.flags.push_back(
          {study.id, "score out of range",
           std::to_string(out_of_range.size()) +
               " probability score(s) outside [0,1]",
           out_of_range});
    }
    report.studies.push_back(std::move(summary));
  }
  return report;
}

}  // namespace replica

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

// End-to-end assessment runs and their reports.

#ifndef REPLICA_COMMANDS_H_
#define REPLICA_COMMANDS_H_

#include <filesystem>
#include <map>
#include <string>

#include "config.h"

namespace replica {

inline constexpr const char* kToolName = "replica";
inline constexpr const char* kToolVersion = "0.1.0";

struct Report {
  std::string command;
  // Everything except the timestamp and the hash; re-running with the same
  // config and seed reproduces it byte for byte.
  Json body;
  std::string text;
  int outcome = 0;  // 0: replicable / clean, 1: not replicable / flagged
  std::string timestamp;
  // Extra output files by name (utilities.csv, distances.csv, study CSVs).
  std::map<std::string, std::string> files;

  std::string CanonicalJson() const;
  std::string CanonicalHash() const;  // SHA-256 of CanonicalJson(), hex
  // body + timestamp + canonical_sha256, pretty-printed.
  std::string FullJson() const;
};

Report RunAssess(const AssessmentConfig& config);
Report RunTest(const AssessmentConfig& config);
Report RunResample(const AssessmentConfig& config);
Report RunBenchmark(const AssessmentConfig& config);
Report RunValidate(const AssessmentConfig& config);
// Study CSVs plus a manifest.json that `assess` can consume directly.
Report RunSimulate(const AssessmentConfig& config);

// Writes report.json, report.txt and every extra file into out_dir.
void WriteReport(const Report& report, const std::filesystem::path& out_dir);

std::string FormatReal(double value);  // 17 significant digits

}  // namespace replica

#endif  // REPLICA_COMMANDS_H_

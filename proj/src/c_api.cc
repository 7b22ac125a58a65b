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

#include "replica/replica.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>

#include "commands.h"
#include "config.h"
#include "error.h"
#include "evaluation.h"
#include "replicability.h"

struct replica_config {
  replica::AssessmentConfig parsed;
};

struct replica_report {
  replica::Report report;
  std::string full_json;
  std::string canonical_json;
  std::string hash;
};

struct replica_collection {
  replica::StudyCollection collection;
};

namespace {

thread_local std::string last_error;

replica_status ToStatus(replica::ErrorCode code) {
  return static_cast<replica_status>(static_cast<int>(code));
}

template <typename Fn>
replica_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return REPLICA_OK;
  } catch (const replica::Error& e) {
    last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return REPLICA_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return REPLICA_INTERNAL_ERROR;
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) {
    replica::Fail(replica::ErrorCode::kInvalidArgument,
                  std::string(what) + " is null");
  }
}

replica_status RunCommand(replica::Report (*run)(const replica::AssessmentConfig&),
                          const replica_config* config, replica_report** out) {
  return Guard([&] {
    Require(config, "config");
    Require(out, "out");
    auto* handle = new replica_report{run(config->parsed), "", "", ""};
    handle->full_json = handle->report.FullJson();
    handle->canonical_json = handle->report.CanonicalJson();
    handle->hash = handle->report.CanonicalHash();
    *out = handle;
  });
}

replica::DiscreteJoint Joint(const double f[4]) {
  replica::ConfusionFrequencies c;
  c.f00 = f[0];
  c.f01 = f[1];
  c.f10 = f[2];
  c.f11 = f[3];
  return replica::MakeBinaryJoint(c);
}

}  // namespace

extern "C" {

const char* replica_version(void) { return replica::kToolVersion; }

const char* replica_last_error(void) { return last_error.c_str(); }

const char* replica_status_name(replica_status status) {
  switch (status) {
    case REPLICA_OK: return "ok";
    case REPLICA_INVALID_ARGUMENT: return "invalid_argument";
    case REPLICA_IO_ERROR: return "io_error";
    case REPLICA_PARSE_ERROR: return "parse_error";
    case REPLICA_SCHEMA_ERROR: return "schema_error";
    case REPLICA_PRECONDITION_FAILED: return "precondition_failed";
    case REPLICA_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

replica_status replica_config_load(const char* path, replica_config** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    const std::filesystem::path p(path);
    replica::Json raw = replica::ReadConfigJson(p);
    *out = new replica_config{replica::ParseConfig(raw, p.parent_path())};
  });
}

replica_status replica_config_parse(const char* json, const char* base_dir,
                                    replica_config** out) {
  return Guard([&] {
    Require(json, "json");
    Require(out, "out");
    replica::Json raw;
    try {
      raw = replica::Json::parse(json);
    } catch (const replica::Json::exception& e) {
      replica::Fail(replica::ErrorCode::kParse,
                    std::string("config is not valid JSON: ") + e.what());
    }
    *out = new replica_config{
        replica::ParseConfig(raw, base_dir ? base_dir : ".")};
  });
}

replica_status replica_config_set(replica_config* config, const char* key,
                                  const char* value) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    Require(value, "value");
    replica::Json raw = config->parsed.raw;
    replica::ApplyOverride(raw, key, value);
    config->parsed = replica::ParseConfig(raw, config->parsed.base_dir);
  });
}

void replica_config_free(replica_config* config) { delete config; }

replica_status replica_assess(const replica_config* c, replica_report** out) {
  return RunCommand(replica::RunAssess, c, out);
}
replica_status replica_test(const replica_config* c, replica_report** out) {
  return RunCommand(replica::RunTest, c, out);
}
replica_status replica_resample(const replica_config* c, replica_report** out) {
  return RunCommand(replica::RunResample, c, out);
}
replica_status replica_benchmark(const replica_config* c, replica_report** out) {
  return RunCommand(replica::RunBenchmark, c, out);
}
replica_status replica_validate(const replica_config* c, replica_report** out) {
  return RunCommand(replica::RunValidate, c, out);
}
replica_status replica_simulate(const replica_config* c, replica_report** out) {
  return RunCommand(replica::RunSimulate, c, out);
}

const char* replica_report_json(const replica_report* report, int canonical) {
  if (report == nullptr) return "";
  return canonical ? report->canonical_json.c_str() : report->full_json.c_str();
}

const char* replica_report_text(const replica_report* report) {
  return report ? report->report.text.c_str() : "";
}

const char* replica_report_hash(const replica_report* report) {
  return report ? report->hash.c_str() : "";
}

int replica_report_outcome(const replica_report* report) {
  return report ? report->report.outcome : -1;
}

replica_status replica_report_write(const replica_report* report,
                                    const char* out_dir) {
  return Guard([&] {
    Require(report, "report");
    Require(out_dir, "out_dir");
    replica::WriteReport(report->report, out_dir);
  });
}

void replica_report_free(replica_report* report) { delete report; }

replica_status replica_collection_load(const replica_config* config,
                                       replica_collection** out) {
  return Guard([&] {
    Require(config, "config");
    Require(out, "out");
    *out = new replica_collection{replica::LoadCollection(config->parsed.load)};
  });
}

size_t replica_collection_size(const replica_collection* collection) {
  return collection ? collection->collection.size() : 0;
}

size_t replica_collection_study_size(const replica_collection* collection,
                                     size_t k) {
  if (collection == nullptr || k >= collection->collection.size()) return 0;
  return collection->collection.study(k).size();
}

const char* replica_collection_study_id(const replica_collection* collection,
                                        size_t k) {
  if (collection == nullptr || k >= collection->collection.size()) return nullptr;
  return collection->collection.study(k).id.c_str();
}

replica_status replica_collection_utilities(const replica_collection* collection,
                                            const replica_config* config,
                                            double threshold, double* values) {
  return Guard([&] {
    Require(collection, "collection");
    Require(config, "config");
    Require(values, "values");
    const replica::DecisionRule rule =
        std::isnan(threshold) ? replica::DecisionRule::Identity()
                              : replica::DecisionRule::Threshold(threshold);
    const replica::UtilityVector v = replica::ComputeUtilityVector(
        collection->collection, rule, config->parsed.utility);
    for (std::size_t k = 0; k < v.size(); ++k) values[k] = v.values[k];
  });
}

void replica_collection_free(replica_collection* collection) {
  delete collection;
}

replica_status replica_tv_distance(const double f[4], const double g[4],
                                   double* out) {
  return Guard([&] {
    Require(f, "f");
    Require(g, "g");
    Require(out, "out");
    *out = replica::TotalVariationDistance(Joint(f), Joint(g));
  });
}

replica_status replica_utility_pseudodistance(const double f[4],
                                              const double g[4], double u01,
                                              double u10, double* out) {
  return Guard([&] {
    Require(f, "f");
    Require(g, "g");
    Require(out, "out");
    *out = replica::UtilityPseudoDistance(
        Joint(f), Joint(g), replica::UtilitySpec::BinaryError(u01, u10),
        replica::DecisionRule::Identity());
  });
}

replica_status replica_optimal_threshold(double u01, double u10,
                                         double prevalence, double* out) {
  return Guard([&] {
    Require(out, "out");
    const replica::Prevalence p = replica::Prevalence::Make(
        prevalence, replica::Prevalence::Source::kUserSpecified);
    *out = replica::OptimalThresholdClosedForm(
               replica::UtilitySpec::BinaryError(u01, u10), p)
               .threshold;
  });
}

}  // extern "C"

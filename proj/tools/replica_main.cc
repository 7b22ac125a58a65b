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

// replica: assess cross-study replicability of a fixed prediction rule.
// Links only against the C interface.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "replica/replica.h"

namespace {

constexpr int kExitError = 2;

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

int ReportError(const std::string& command, const std::string& kind,
                const std::string& message) {
  std::cerr << "{\"error\":{\"command\":\"" << Escape(command)
            << "\",\"kind\":\"" << Escape(kind) << "\",\"message\":\""
            << Escape(message) << "\"}}\n";
  return kExitError;
}

int ReportStatus(const std::string& command, replica_status status) {
  return ReportError(command, replica_status_name(status), replica_last_error());
}

struct Options {
  std::string config;
  std::string out = "replica_out";
  std::optional<unsigned long long> seed;
  bool quiet = false;
  std::optional<double> epsilon;
  std::optional<std::string> backend;
  std::optional<std::string> statistic;
  std::optional<std::string> scheme;
  std::optional<int> replicates;
  std::optional<double> gamma;
  std::optional<int> permutations;
  std::optional<std::string> adjust;
  std::optional<double> alpha;
  bool emit_draws = false;
  std::optional<double> u0;
  std::optional<std::string> study;
  std::vector<std::string> sets;
};

std::string Quote(const std::string& s) { return "\"" + Escape(s) + "\""; }

std::string Real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Flag values become config overrides so the report echoes what actually ran.
std::vector<std::pair<std::string, std::string>> Overrides(
    const std::string& command, const Options& o) {
  std::vector<std::pair<std::string, std::string>> out;
  if (o.seed) out.emplace_back("seed", std::to_string(*o.seed));
  if (o.epsilon) out.emplace_back("epsilon", Real(*o.epsilon));
  if (o.backend) out.emplace_back("distance_backend", Quote(*o.backend));
  if (o.statistic) {
    out.emplace_back(command == "test" ? "test.statistic" : "resample.statistic",
                     Quote(*o.statistic));
  }
  if (o.scheme) out.emplace_back("resample.scheme", Quote(*o.scheme));
  if (o.replicates) out.emplace_back("resample.replicates", std::to_string(*o.replicates));
  if (o.gamma) out.emplace_back("resample.gamma", Real(*o.gamma));
  if (o.permutations) out.emplace_back("test.permutations", std::to_string(*o.permutations));
  if (o.adjust) out.emplace_back("test.adjust", Quote(*o.adjust));
  if (o.alpha) out.emplace_back("test.alpha", Real(*o.alpha));
  if (o.emit_draws) {
    out.emplace_back(command == "test" ? "test.emit_null_draws"
                                       : "resample.emit_statistics",
                     "true");
  }
  if (o.u0) out.emplace_back("benchmark.u0", Real(*o.u0));
  if (o.study) out.emplace_back("benchmark.study", Quote(*o.study));
  return out;
}

using CommandFn = replica_status (*)(const replica_config*, replica_report**);

int Run(const std::string& command, CommandFn fn, const Options& o) {
  replica_config* config = nullptr;
  replica_status status = replica_config_load(o.config.c_str(), &config);
  if (status != REPLICA_OK) return ReportStatus(command, status);

  auto overrides = Overrides(command, o);
  for (const auto& set : o.sets) {
    const auto eq = set.find('=');
    if (eq == std::string::npos || eq == 0) {
      replica_config_free(config);
      return ReportError(command, "invalid_argument",
                         "--set expects key=value, got '" + set + "'");
    }
    overrides.emplace_back(set.substr(0, eq), set.substr(eq + 1));
  }
  for (const auto& [key, value] : overrides) {
    status = replica_config_set(config, key.c_str(), value.c_str());
    if (status != REPLICA_OK) {
      replica_config_free(config);
      return ReportStatus(command, status);
    }
  }

  replica_report* report = nullptr;
  status = fn(config, &report);
  replica_config_free(config);
  if (status != REPLICA_OK) return ReportStatus(command, status);

  status = replica_report_write(report, o.out.c_str());
  if (status != REPLICA_OK) {
    replica_report_free(report);
    return ReportStatus(command, status);
  }
  if (!o.quiet) std::cout << replica_report_text(report);
  const int outcome = replica_report_outcome(report);
  replica_report_free(report);
  return outcome;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-study replicability assessment for fixed prediction rules"};
  app.set_version_flag("--version", std::string(replica_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("-c,--config", o.config, "Assessment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("-o,--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Master seed (overrides the config)");
  app.add_flag("-q,--quiet", o.quiet, "Do not print the text summary");
  app.add_option("--set", o.sets, "Override a config key: key=value");

  struct Sub {
    const char* name;
    const char* help;
    CommandFn fn;
  };
  const std::vector<Sub> subs = {
      {"assess", "Utility vector, verdicts and distance table", replica_assess},
      {"test", "Permutation test of the replicability null", replica_test},
      {"resample", "Bootstrap or study-strap resampling", replica_resample},
      {"simulate", "Write synthetic study CSVs and a manifest", replica_simulate},
      {"benchmark", "Compare one study against a benchmark utility", replica_benchmark},
      {"validate", "Load the studies and report data problems", replica_validate},
  };
  std::string chosen;
  CommandFn chosen_fn = nullptr;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->callback([&chosen, &chosen_fn, s] {
      chosen = s.name;
      chosen_fn = s.fn;
    });
    const std::string name = s.name;
    if (name == "assess") {
      sub->add_option("--epsilon", o.epsilon, "Epsilon for every requested definition");
      sub->add_option("--backend", o.backend, "Distance backend: tv or ks");
    } else if (name == "test") {
      sub->add_option("--permutations", o.permutations, "Number of permutations");
      sub->add_option("--statistic", o.statistic,
                      "max_abs_diff, max_relative_diff or max_distance");
      sub->add_option("--adjust", o.adjust, "Pairwise adjustment: none or bonferroni");
      sub->add_option("--alpha", o.alpha, "Rejection level");
      sub->add_option("--backend", o.backend, "Distance backend: tv or ks");
      sub->add_flag("--emit-draws", o.emit_draws, "Include the null draws");
    } else if (name == "resample") {
      sub->add_option("--scheme", o.scheme, "within_study_bootstrap, cluster_bootstrap or study_strap");
      sub->add_option("--replicates", o.replicates, "Number of replicates");
      sub->add_option("--gamma", o.gamma, "Study-strap pooling weight in [0, 1]");
      sub->add_option("--statistic", o.statistic, "Statistic for cluster / strap");
      sub->add_option("--epsilon", o.epsilon, "Report the share of replicates within epsilon");
      sub->add_option("--backend", o.backend, "Distance backend: tv or ks");
      sub->add_flag("--emit-draws", o.emit_draws, "Include every replicate statistic");
    } else if (name == "benchmark") {
      sub->add_option("--u0", o.u0, "Benchmark utility");
      sub->add_option("--study", o.study, "Study to compare");
      sub->add_option("--epsilon", o.epsilon, "Tolerance on |gap|");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError(chosen.empty() ? "replica" : chosen, "usage", e.what());
  }
  return Run(chosen, chosen_fn, o);
}

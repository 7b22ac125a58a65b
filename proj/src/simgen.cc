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

#include "simgen.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "error.h"
#include "rng.h"

namespace replica {
namespace {

constexpr int kGridCells = 10000;

double SampleScore(const ScoreModel& model, Engine& engine) {
  if (model.kind == ScoreModel::Kind::kBeta) {
    const double a = model.mean * model.concentration;
    const double b = (1.0 - model.mean) * model.concentration;
    const double x = std::gamma_distribution<double>(a, 1.0)(engine);
    const double y = std::gamma_distribution<double>(b, 1.0)(engine);
    return x + y > 0.0 ? x / (x + y) : model.mean;
  }
  std::discrete_distribution<std::size_t> pick(model.probabilities.begin(),
                                               model.probabilities.end());
  return model.values[pick(engine)];
}

double MaxScore(const ScoreModel& model) {
  if (model.kind == ScoreModel::Kind::kBeta) return 1.0;
  return *std::max_element(model.values.begin(), model.values.end());
}

double MinScore(const ScoreModel& model) {
  if (model.kind == ScoreModel::Kind::kBeta) return 0.0;
  return *std::min_element(model.values.begin(), model.values.end());
}

// E[exp(tilt * s)] and E[exp(tilt * s) 1{s >= t}] under one score model.
struct TiltedMass {
  double total = 0.0;
  double at_or_above = 0.0;
};

TiltedMass Integrate(const ScoreModel& model, double tilt, double threshold) {
  TiltedMass mass;
  if (model.kind == ScoreModel::Kind::kTable) {
    for (std::size_t i = 0; i < model.values.size(); ++i) {
      const double w = model.probabilities[i] * std::exp(tilt * model.values[i]);
      mass.total += w;
      if (model.values[i] >= threshold) mass.at_or_above += w;
    }
    return mass;
  }
  const double a = model.mean * model.concentration;
  const double b = (1.0 - model.mean) * model.concentration;
  const double h = 1.0 / kGridCells;
  std::vector<double> log_kernel(kGridCells);
  for (int i = 0; i < kGridCells; ++i) {
    const double x = (i + 0.5) * h;
    log_kernel[i] = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
  }
  const double peak = *std::max_element(log_kernel.begin(), log_kernel.end());
  double norm = 0.0;
  std::vector<double> weight(kGridCells);
  for (int i = 0; i < kGridCells; ++i) {
    weight[i] = std::exp(log_kernel[i] - peak);
    norm += weight[i];
  }
  for (int i = 0; i < kGridCells; ++i) {
    const double x = (i + 0.5) * h;
    const double w = weight[i] / norm * std::exp(tilt * x);
    // Share of cell [i h, (i + 1) h] at or above the threshold.
    const double above =
        std::clamp((static_cast<double>(i + 1) * h - threshold) / h, 0.0, 1.0);
    mass.total += w;
    mass.at_or_above += w * above;
  }
  return mass;
}

}  // namespace

ScoreModel ScoreModel::Beta(double mean, double concentration) {
  ScoreModel model;
  model.kind = Kind::kBeta;
  model.mean = mean;
  model.concentration = concentration;
  model.Validate();
  return model;
}

ScoreModel ScoreModel::Table(std::vector<double> values,
                             std::vector<double> probabilities) {
  ScoreModel model;
  model.kind = Kind::kTable;
  model.values = std::move(values);
  model.probabilities = std::move(probabilities);
  model.Validate();
  return model;
}

void ScoreModel::Validate() const {
  if (kind == Kind::kBeta) {
    if (!(mean > 0.0 && mean < 1.0) || !(concentration > 0.0) ||
        !std::isfinite(concentration)) {
      Fail(ErrorCode::kInvalidArgument,
           "beta score model needs mean in (0, 1) and concentration > 0");
    }
    return;
  }
  if (values.empty() || values.size() != probabilities.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "score table needs matching, non-empty values and probabilities");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(probabilities[i] >= 0.0)) {
      Fail(ErrorCode::kInvalidArgument, "invalid score table entry");
    }
    sum += probabilities[i];
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    Fail(ErrorCode::kInvalidArgument, "score table probabilities must sum to 1");
  }
}

void StudySpec::Validate() const {
  if (n < 1) Fail(ErrorCode::kInvalidArgument, "study size must be >= 1");
  if (!(prevalence > 0.0 && prevalence < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "prevalence must lie in (0, 1)");
  }
  if (!(concept_flip >= 0.0 && concept_flip < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "concept_flip must lie in [0, 1)");
  }
  if (!std::isfinite(covariate_shift) || std::fabs(covariate_shift) > 50.0) {
    Fail(ErrorCode::kInvalidArgument, "covariate_shift must lie in [-50, 50]");
  }
  negative.Validate();
  positive.Validate();
}

StudyCollection Generate(const CollectionSpec& spec) {
  if (spec.studies.empty()) {
    Fail(ErrorCode::kInvalidArgument, "simulation needs at least one study");
  }
  Schema schema;
  schema.features = {{kSourceStudyFeature, FeatureType::kCategorical}};
  schema.label_set = {"0", "1"};
  schema.has_score = true;
  schema.score_is_probability = true;

  std::set<std::string> ids;
  std::vector<Study> studies;
  for (std::size_t k = 0; k < spec.studies.size(); ++k) {
    const StudySpec& s = spec.studies[k];
    s.Validate();
    const std::string id = s.id.empty() ? "study" + std::to_string(k + 1) : s.id;
    if (!ids.insert(id).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate simulated study id '" + id + "'");
    }
    for (const ScoreModel* m : {&s.negative, &s.positive}) {
      if (MinScore(*m) < 0.0 || MaxScore(*m) > 1.0) {
        schema.score_is_probability = false;
      }
    }
    // Acceptance ceiling of the exponential tilt over both score supports.
    const double log_ceiling =
        std::max({s.covariate_shift * MaxScore(s.negative),
                  s.covariate_shift * MinScore(s.negative),
                  s.covariate_shift * MaxScore(s.positive),
                  s.covariate_shift * MinScore(s.positive)});

    Engine engine = SubstreamEngine(spec.seed, k);
    Study study;
    study.id = id;
    study.units.reserve(static_cast<std::size_t>(s.n));
    for (int i = 0; i < s.n; ++i) {
      Label label;
      double score;
      while (true) {
        label = Uniform01(engine) < s.prevalence ? 1 : 0;
        score = SampleScore(label ? s.positive : s.negative, engine);
        if (s.covariate_shift == 0.0 ||
            Uniform01(engine) <
                std::exp(s.covariate_shift * score - log_ceiling)) {
          break;
        }
      }
      if (s.concept_flip > 0.0 && Uniform01(engine) < s.concept_flip) {
        label = Uniform01(engine) < s.prevalence ? 1 : 0;
      }
      Unit unit;
      unit.features = {FeatureValue(id)};
      unit.label = label;
      unit.score = score;
      study.units.push_back(std::move(unit));
    }
    studies.push_back(std::move(study));
  }
  return StudyCollection(schema, std::move(studies));
}

ConfusionFrequencies ExactCellProbabilities(const StudySpec& spec,
                                            const DecisionRule& rule) {
  spec.Validate();
  if (rule.kind != DecisionRule::Kind::kThreshold) {
    Fail(ErrorCode::kPrecondition, "population cells need a threshold rule");
  }
  const TiltedMass neg =
      Integrate(spec.negative, spec.covariate_shift, rule.threshold);
  const TiltedMass pos =
      Integrate(spec.positive, spec.covariate_shift, rule.threshold);
  const double q1 = spec.prevalence;
  const double q0 = 1.0 - spec.prevalence;
  const double z = q0 * neg.total + q1 * pos.total;
  // Joint of (action, label) after the tilt, before any flip.
  const double p11 = q1 * pos.at_or_above / z;
  const double p10 = q0 * neg.at_or_above / z;
  const double p01 = q1 * (pos.total - pos.at_or_above) / z;
  const double p00 = q0 * (neg.total - neg.at_or_above) / z;
  const double alert = p11 + p10;
  const double rho = spec.concept_flip;
  ConfusionFrequencies f;
  f.f00 = (1.0 - rho) * p00 + rho * (1.0 - alert) * q0;
  f.f01 = (1.0 - rho) * p01 + rho * (1.0 - alert) * q1;
  f.f10 = (1.0 - rho) * p10 + rho * alert * q0;
  f.f11 = (1.0 - rho) * p11 + rho * alert * q1;
  return f;
}

}  // namespace replica

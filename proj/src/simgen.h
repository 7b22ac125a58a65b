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

// Synthetic multi-study collections with controllable label, covariate and
// concept shift.
//
// A unit of study k is drawn as
//   y ~ Bernoulli(prevalence), s ~ P(score | y)
//   accept (y, s) with probability proportional to exp(covariate_shift * s)
//   with probability concept_flip, replace y by a fresh Bernoulli(prevalence)
// The tilt reweights the score marginal while leaving P(y | s) untouched;
// the flip changes P(y | s) while leaving the score marginal untouched.

#ifndef REPLICA_SIMGEN_H_
#define REPLICA_SIMGEN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "decision.h"
#include "evaluation.h"
#include "studyset.h"

namespace replica {

struct ScoreModel {
  enum class Kind { kBeta, kTable };

  Kind kind = Kind::kBeta;
  double mean = 0.5;  // Beta(mean * concentration, (1 - mean) * concentration)
  double concentration = 2.0;
  std::vector<double> values;         // kTable support
  std::vector<double> probabilities;  // kTable masses, sum to 1

  static ScoreModel Beta(double mean, double concentration);
  static ScoreModel Table(std::vector<double> values,
                          std::vector<double> probabilities);
  void Validate() const;
};

struct StudySpec {
  std::string id;
  int n = 100;
  double prevalence = 0.5;
  ScoreModel negative = ScoreModel::Beta(0.3, 10.0);
  ScoreModel positive = ScoreModel::Beta(0.7, 10.0);
  double concept_flip = 0.0;     // in [0, 1)
  double covariate_shift = 0.0;  // exponential tilt of the score marginal

  void Validate() const;
};

struct CollectionSpec {
  std::vector<StudySpec> studies;
  std::uint64_t seed = 0;
};

// Name of the categorical feature carrying the generating study's id.
inline constexpr const char* kSourceStudyFeature = "source_study";

// Deterministic given the seed; study k draws from substream k.
StudyCollection Generate(const CollectionSpec& spec);

// Population (f00, f01, f10, f11) of a threshold rule under the spec. Beta
// models are integrated on a 10^4-cell midpoint grid.
ConfusionFrequencies ExactCellProbabilities(const StudySpec& spec,
                                            const DecisionRule& rule);

}  // namespace replica

#endif  // REPLICA_SIMGEN_H_

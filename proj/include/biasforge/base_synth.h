// Copyright 2026 The BiasForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BIASFORGE_BASE_SYNTH_H_
#define BIASFORGE_BASE_SYNTH_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "biasforge/dataset.h"

namespace biasforge {

// Desk-scale stand-in for a temporally ordered fraud dataset.
struct BaseConfig {
  std::int64_t n_rows = 60000;
  double base_prevalence = 0.01;
  int n_informative = 6;
  int n_noise = 4;
  // Per-feature gap between the class-conditional means, in standard
  // deviations.
  double class_separation = 1.0;
  // Mean shift of the informative features over the last drift_fraction rows.
  double drift_shift = 0.25;
  double drift_fraction = 0.25;
  std::uint64_t seed = 7;

  absl::Status Validate() const;
};

// Columns: t (row number), y, inf1..infK, noise1..noiseM. Each label is an
// independent Bernoulli(base_prevalence); informative features are unit
// variance normals with mean class_separation for positives and 0 for
// negatives (plus drift_shift inside the drift window); noise features are
// standard normal.
absl::StatusOr<TabularDataset> GenerateBaseDataset(const BaseConfig& cfg);

}  // namespace biasforge

#endif  // BIASFORGE_BASE_SYNTH_H_

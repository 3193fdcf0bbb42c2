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

#include "biasforge/base_synth.h"

#include <cmath>
#include <string>
#include <vector>

#include "str_util.h"
#include "biasforge/rng.h"

namespace biasforge {

absl::Status BaseConfig::Validate() const {
  if (n_rows < 100) {
    return absl::InvalidArgumentError(
        StrCat("n_rows must be >= 100, got ", n_rows));
  }
  if (!(base_prevalence > 0.0 && base_prevalence < 1.0)) {
    return absl::InvalidArgumentError("base_prevalence must be in (0,1)");
  }
  if (base_prevalence * static_cast<double>(n_rows) < 10.0) {
    return absl::InvalidArgumentError(
        "base_prevalence * n_rows must be >= 10");
  }
  if (n_informative < 1) {
    return absl::InvalidArgumentError("n_informative must be >= 1");
  }
  if (n_noise < 0) return absl::InvalidArgumentError("n_noise must be >= 0");
  if (!(class_separation >= 0.0)) {
    return absl::InvalidArgumentError("class_separation must be >= 0");
  }
  if (!(drift_shift >= 0.0)) {
    return absl::InvalidArgumentError("drift_shift must be >= 0");
  }
  if (!(drift_fraction >= 0.0 && drift_fraction < 1.0)) {
    return absl::InvalidArgumentError("drift_fraction must be in [0,1)");
  }
  return absl::OkStatus();
}

absl::StatusOr<TabularDataset> GenerateBaseDataset(const BaseConfig& cfg) {
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  const auto n = static_cast<std::size_t>(cfg.n_rows);
  const auto drift_start = static_cast<std::size_t>(
      std::ceil(static_cast<long double>(1.0 - cfg.drift_fraction) * n));

  std::vector<Column> columns;
  columns.push_back({"t", ColumnType::kTime, std::vector<double>(n)});
  columns.push_back({"y", ColumnType::kBinary, std::vector<double>(n)});
  for (int j = 1; j <= cfg.n_informative; ++j) {
    columns.push_back(
        {StrCat("inf", j), ColumnType::kReal, std::vector<double>(n)});
  }
  for (int j = 1; j <= cfg.n_noise; ++j) {
    columns.push_back(
        {StrCat("noise", j), ColumnType::kReal, std::vector<double>(n)});
  }

  // Row-major draw order: label, informative features, noise features.
  SplitMix64 rng(DeriveSeed(cfg.seed, {HashTag("base_dataset")}));
  const std::size_t first_inf = 2;
  const std::size_t first_noise = first_inf + cfg.n_informative;
  for (std::size_t r = 0; r < n; ++r) {
    columns[0].values[r] = static_cast<double>(r);
    const bool positive = rng.Bernoulli(cfg.base_prevalence);
    columns[1].values[r] = positive ? 1.0 : 0.0;
    double mean = positive ? cfg.class_separation : 0.0;
    if (r >= drift_start) mean += cfg.drift_shift;
    for (int j = 0; j < cfg.n_informative; ++j) {
      columns[first_inf + j].values[r] = mean + rng.Normal();
    }
    for (int j = 0; j < cfg.n_noise; ++j) {
      columns[first_noise + j].values[r] = rng.Normal();
    }
  }
  return TabularDataset::Create(std::move(columns), "y", "t");
}

}  // namespace biasforge

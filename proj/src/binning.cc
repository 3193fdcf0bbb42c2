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

#include "biasforge/binning.h"

#include <algorithm>

namespace biasforge {

FeatureMatrix MakeFeatureMatrix(
    std::span<const std::span<const double>> columns) {
  FeatureMatrix m;
  m.n_features = columns.size();
  m.n_rows = columns.empty() ? 0 : columns.front().size();
  m.values.resize(m.n_rows * m.n_features);
  for (std::size_t f = 0; f < m.n_features; ++f) {
    for (std::size_t i = 0; i < m.n_rows; ++i) {
      m.values[i * m.n_features + f] = columns[f][i];
    }
  }
  return m;
}

BinnedMatrix BinFeatures(const FeatureMatrix& x, int max_bins) {
  max_bins = std::clamp(max_bins, 2, 256);
  BinnedMatrix b;
  b.n_rows = x.n_rows;
  b.n_features = x.n_features;
  b.codes.resize(x.n_rows * x.n_features);
  b.cuts.resize(x.n_features);
  std::vector<double> sorted(x.n_rows);
  for (std::size_t f = 0; f < x.n_features; ++f) {
    for (std::size_t i = 0; i < x.n_rows; ++i) sorted[i] = x.row(i)[f];
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    std::vector<double>& cuts = b.cuts[f];
    if (static_cast<int>(distinct.size()) <= max_bins) {
      cuts.assign(distinct.begin(), distinct.end());
      if (!cuts.empty()) cuts.pop_back();
    } else {
      for (int k = 1; k < max_bins; ++k) {
        const std::size_t pos = k * x.n_rows / max_bins;
        const double v = sorted[std::min(pos, x.n_rows - 1)];
        if (v != sorted.back() && (cuts.empty() || v > cuts.back())) {
          cuts.push_back(v);
        }
      }
    }
    for (std::size_t i = 0; i < x.n_rows; ++i) {
      const double v = x.row(i)[f];
      b.codes[i * x.n_features + f] = static_cast<std::uint8_t>(
          std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
    }
  }
  return b;
}

}  // namespace biasforge

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

#ifndef BIASFORGE_BINNING_H_
#define BIASFORGE_BINNING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace biasforge {

inline constexpr int kDefaultMaxBins = 64;

// Row-major matrix of raw feature values.
struct FeatureMatrix {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<double> values;

  const double* row(std::size_t i) const { return &values[i * n_features]; }
};

FeatureMatrix MakeFeatureMatrix(std::span<const std::span<const double>> columns);

// Quantile-binned features. Bin b of feature f holds values v with
// cuts[f][b-1] < v <= cuts[f][b]; the last bin is unbounded above. Because
// every cut is an observed value, "bin <= b" on training rows is the same
// test as "value <= cuts[f][b]" on any row.
struct BinnedMatrix {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<std::uint8_t> codes;  // row-major
  std::vector<std::vector<double>> cuts;

  int num_bins(std::size_t f) const { return static_cast<int>(cuts[f].size()) + 1; }
  const std::uint8_t* row(std::size_t i) const { return &codes[i * n_features]; }
};

BinnedMatrix BinFeatures(const FeatureMatrix& x, int max_bins = kDefaultMaxBins);

}  // namespace biasforge

#endif  // BIASFORGE_BINNING_H_

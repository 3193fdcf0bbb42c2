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

#ifndef BIASFORGE_HIST_TREE_H_
#define BIASFORGE_HIST_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "biasforge/binning.h"
#include "biasforge/rng.h"

namespace biasforge {

// A node is a leaf when `feature` is negative. Rows with
// x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double Predict(const double* row) const;
  int Depth() const;
  int NumLeaves() const;
  bool operator==(const Tree&) const = default;
};

struct GrowOptions {
  int max_depth = 6;
  // Minimum weighted row count (Gini) or row count (Newton) per child.
  double min_leaf = 1.0;
  // Fraction of features considered at each split; 1 disables sampling.
  double feature_fraction = 1.0;
  // Newton trees only.
  double l2 = 1.0;
  double min_child_hessian = 1e-3;
};

// CART classification tree on weighted Gini impurity. `weights[i]` is the
// multiplicity of row i; rows with zero weight are excluded. Leaves hold the
// weighted positive fraction. `rng` is only consumed for feature sampling.
Tree GrowGiniTree(const BinnedMatrix& x, std::span<const double> labels,
                  std::span<const double> weights, const GrowOptions& options,
                  SplitMix64& rng);

// Second-order regression tree fit to gradients and hessians over `rows`.
// Leaves hold -G / (H + l2).
Tree GrowNewtonTree(const BinnedMatrix& x, std::span<const double> grad,
                    std::span<const double> hess,
                    std::vector<std::uint32_t> rows,
                    const GrowOptions& options);

}  // namespace biasforge

#endif  // BIASFORGE_HIST_TREE_H_

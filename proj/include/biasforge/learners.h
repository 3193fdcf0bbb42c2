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

#ifndef BIASFORGE_LEARNERS_H_
#define BIASFORGE_LEARNERS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "biasforge/dataset.h"
#include "biasforge/hist_tree.h"

namespace biasforge {

enum class Algorithm { kLogReg, kTree, kForest, kGbt };

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::kLogReg, Algorithm::kTree, Algorithm::kForest, Algorithm::kGbt};

std::string_view AlgorithmName(Algorithm algorithm);
absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name);

struct LogRegParams {
  double learning_rate = 0.01;
  double l2 = 1e-4;
  int epochs = 50;
  bool operator==(const LogRegParams&) const = default;
};

struct TreeParams {
  int max_depth = 6;
  int min_leaf = 20;
  bool operator==(const TreeParams&) const = default;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 8;
  double feature_fraction = 0.6;
  bool bootstrap = true;
  int min_leaf = 5;
  bool operator==(const ForestParams&) const = default;
};

struct GbtParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 4;
  double subsample = 0.8;
  int min_leaf = 20;
  double l2 = 1.0;
  bool operator==(const GbtParams&) const = default;
};

using Hyperparameters =
    std::variant<LogRegParams, TreeParams, ForestParams, GbtParams>;

struct ModelSpec {
  std::string id;
  Algorithm algorithm = Algorithm::kLogReg;
  Hyperparameters params = LogRegParams{};
  // Include the protected attribute as a feature (A -> 1, B -> 0).
  bool aware = false;
  std::uint64_t seed = 0;

  // Checks that the hyperparameters match the algorithm and are usable.
  // Fit accepts any valid spec, including ones outside the sampling grid.
  absl::Status Validate() const;
  // True when every hyperparameter lies inside the sampling grid.
  bool InGrid() const;
  bool operator==(const ModelSpec&) const = default;
};

// Draws `count` specs uniformly from the algorithm's grid.
absl::StatusOr<std::vector<ModelSpec>> SampleHyperparams(Algorithm algorithm,
                                                         int count,
                                                         std::uint64_t seed);

struct TrainingInfo {
  int iterations = 0;
  std::vector<double> loss_trace;
  bool converged = true;
  bool operator==(const TrainingInfo&) const = default;
};

struct LinearParams {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> weights;
  double bias = 0.0;
  bool operator==(const LinearParams&) const = default;
};

// Immutable after construction; safe to share across threads.
class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, std::vector<std::string> features,
               TrainingInfo info, LinearParams linear, std::vector<Tree> trees,
               double base_score);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<std::string>& features() const { return features_; }
  const TrainingInfo& info() const { return info_; }
  const LinearParams& linear() const { return linear_; }
  const std::vector<Tree>& trees() const { return trees_; }
  double base_score() const { return base_score_; }

  // One score in [0, 1] per row. Only columns in features() are read.
  absl::StatusOr<std::vector<double>> Predict(const TabularDataset& ds) const;

  bool operator==(const TrainedModel&) const = default;

 private:
  ModelSpec spec_;
  std::vector<std::string> features_;
  TrainingInfo info_;
  LinearParams linear_;
  std::vector<Tree> trees_;
  double base_score_ = 0.0;
};

// Feature columns a spec trains on: every non-label, non-time, non-protected
// column, plus the protected attribute when aware.
absl::StatusOr<std::vector<std::string>> ModelFeatures(const ModelSpec& spec,
                                                       const TabularDataset& ds);

absl::StatusOr<TrainedModel> Fit(const ModelSpec& spec,
                                 const TabularDataset& train);

}  // namespace biasforge

#endif  // BIASFORGE_LEARNERS_H_

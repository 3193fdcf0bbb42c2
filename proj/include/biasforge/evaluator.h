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

#ifndef BIASFORGE_EVALUATOR_H_
#define BIASFORGE_EVALUATOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "biasforge/dataset.h"

namespace biasforge {

inline constexpr double kDefaultTargetFpr = 0.05;
// Half-width of the 80% rule band in log2 units: log2(1.25).
inline constexpr double kEightyRuleBand = 0.32192809488736235;

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t positives() const { return tp + fn; }
  std::int64_t negatives() const { return fp + tn; }
  std::int64_t total() const { return tp + fp + tn + fn; }

  // Each rate is empty when its denominator is zero.
  std::optional<double> prevalence() const;
  std::optional<double> fpr() const;
  std::optional<double> fnr() const;
  std::optional<double> tpr() const;
  std::optional<double> ppv() const;

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

struct GroupConfusion : ConfusionCounts {
  Group group = Group::kA;
};

// Smallest t with FP(t) / N_neg <= target_fpr under the rule score > t.
// Always one of the negative scores.
absl::StatusOr<double> ThresholdAtGlobalFpr(std::span<const double> scores,
                                            std::span<const double> labels,
                                            double target_fpr);

ConfusionCounts ConfusionAt(std::span<const double> scores,
                            std::span<const double> labels, double threshold);

// `groups` holds group codes (A = 1, B = 0). Fails if either group is empty.
absl::StatusOr<std::pair<GroupConfusion, GroupConfusion>> GroupConfusionAt(
    std::span<const double> scores, std::span<const double> labels,
    std::span<const double> groups, double threshold);

// log2(x_A / x_B), computed as log2(x_A) - log2(x_B) so that swapping groups
// negates it exactly. Empty when either rate is missing or zero.
std::optional<double> Log2Ratio(std::optional<double> a,
                                std::optional<double> b);

bool WithinEightyRule(double log2_ratio);

struct FairnessRatios {
  std::optional<double> log2_fpr_ratio;
  std::optional<double> log2_fnr_ratio;
  std::optional<double> log2_ppv_ratio;
  std::optional<bool> eighty_rule_fpr;
  std::optional<bool> eighty_rule_fnr;
  // Names of undefined or zero rates, e.g. "FNR_B=0".
  std::vector<std::string> degenerate;
};

FairnessRatios ComputeFairnessRatios(const GroupConfusion& a,
                                     const GroupConfusion& b);

// FPR_A/FPR_B = prevalence_odds * imprecision_odds * recall, each an A/B
// ratio of p/(1-p), (1-PPV)/PPV and 1-FNR respectively.
struct FprDecomposition {
  double prevalence_odds = 0.0;
  double imprecision_odds = 0.0;
  double recall = 0.0;
  double fpr_ratio = 0.0;
  double product = 0.0;
  // |product - fpr_ratio| / fpr_ratio.
  double residual = 0.0;
};

absl::StatusOr<FprDecomposition> DecomposeFprRatio(const GroupConfusion& a,
                                                   const GroupConfusion& b);

// Area under the ROC curve, ties counted one half. Empty if a class is absent.
std::optional<double> RocAuc(std::span<const double> scores,
                             std::span<const double> labels);

struct FairnessReport {
  double target_fpr = kDefaultTargetFpr;
  double threshold = 0.0;
  ConfusionCounts global;
  GroupConfusion a;
  GroupConfusion b;
  FairnessRatios ratios;
  std::optional<FprDecomposition> decomposition;
  std::optional<double> auc;
  std::optional<double> auc_a;
  std::optional<double> auc_b;

  double tpr() const { return global.tpr().value_or(0.0); }
  double fpr() const { return global.fpr().value_or(0.0); }
};

absl::StatusOr<FairnessReport> EvaluateScores(std::span<const double> scores,
                                              std::span<const double> labels,
                                              std::span<const double> groups,
                                              double target_fpr);

struct EvaluatedRun {
  std::uint64_t seed = 0;
  std::string spec_id;
  FairnessReport report;
};

// One run per seed, ordered by seed: highest global TPR, then smallest
// |log2 FPR ratio| (undefined last), then smallest spec id.
std::vector<EvaluatedRun> SelectTopPerSeed(std::vector<EvaluatedRun> runs);

struct Summary {
  std::optional<double> median;
  std::optional<double> min;
  std::optional<double> max;
  int n_defined = 0;
  int n_undefined = 0;
};

// Median averages the two middle values for even counts.
Summary Summarize(const std::vector<std::optional<double>>& values);

struct AggregateResult {
  std::string scenario;
  std::string algorithm;
  bool aware = false;
  double target_fpr = kDefaultTargetFpr;
  std::vector<EvaluatedRun> top_runs;
  Summary tpr;
  Summary log2_fpr_ratio;
  Summary log2_fnr_ratio;
  Summary log2_ppv_ratio;
  Summary auc_a;
  Summary auc_b;
  // Set when every seed's ratios are undefined.
  bool undefined = false;
};

absl::StatusOr<AggregateResult> AggregateErrorBars(
    std::vector<EvaluatedRun> top_runs);

}  // namespace biasforge

#endif  // BIASFORGE_EVALUATOR_H_

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

#ifndef BIASFORGE_AUDITOR_H_
#define BIASFORGE_AUDITOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "biasforge/dataset.h"

namespace biasforge {

enum class BiasCondition {
  kGroupSizeDisparity,
  kPrevalenceDisparity,
  kClassConditionalDisparity,
  kProtectedAttributeBias,  // composite: prevalence OR class-conditional
};

std::string_view BiasConditionName(BiasCondition condition);

inline constexpr double kDefaultAlpha = 0.01;
// Cells with fewer rows are not tested.
inline constexpr std::int64_t kMinCellRows = 10;

// One (feature, class) comparison of group A against group B.
struct FeatureTest {
  std::string feature;
  int label = 0;
  std::string test;  // "ks" or "chi2"
  double statistic = 0.0;
  double p_value = 1.0;
  double corrected_p_value = 1.0;  // Bonferroni
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  bool skipped = false;
};

struct AuditResult {
  BiasCondition condition = BiasCondition::kGroupSizeDisparity;
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = kDefaultAlpha;
  bool detected = false;
  // Set when one group is absent from the data.
  bool degenerate = false;
  // Effect size: P[Z=A] for group size, P[Y=1|A]/P[Y=1|B] for prevalence,
  // the largest KS/chi-square statistic for class-conditional.
  std::optional<double> effect;
  std::vector<FeatureTest> detail;
};

// Two-sided test of P[Z=A] = 1/2: exact binomial up to 1000 rows, normal
// approximation above.
absl::StatusOr<AuditResult> AuditGroupSize(const TabularDataset& ds,
                                           double alpha = kDefaultAlpha);

// Pooled two-proportion z-test of P[Y=1|A] = P[Y=1|B].
absl::StatusOr<AuditResult> AuditPrevalence(const TabularDataset& ds,
                                            double alpha = kDefaultAlpha);

// Per feature and class, A vs B: KS for real features, chi-square for binary
// and categorical ones; Bonferroni over 2 * #features.
absl::StatusOr<AuditResult> AuditClassConditional(const TabularDataset& ds,
                                                  double alpha = kDefaultAlpha);

// Group size, prevalence, class-conditional, then the composite.
absl::StatusOr<std::vector<AuditResult>> AuditDataset(
    const TabularDataset& ds, double alpha = kDefaultAlpha);

// Detail rows ordered from most to least significant.
std::vector<FeatureTest> RankFeatureTests(std::vector<FeatureTest> detail);

struct ConditionDifference {
  BiasCondition condition;
  bool detected_train = false;
  bool detected_test = false;
  bool differs = false;
};

struct ProfileComparison {
  std::vector<ConditionDifference> conditions;
  bool any_differs = false;
};

absl::StatusOr<ProfileComparison> CompareProfiles(
    const std::vector<AuditResult>& train_audit,
    const std::vector<AuditResult>& test_audit);

std::string FormatAuditReport(const std::vector<AuditResult>& results);

}  // namespace biasforge

#endif  // BIASFORGE_AUDITOR_H_

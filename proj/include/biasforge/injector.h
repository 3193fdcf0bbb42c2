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

#ifndef BIASFORGE_INJECTOR_H_
#define BIASFORGE_INJECTOR_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "biasforge/dataset.h"

namespace biasforge {

enum class ScenarioKind {
  kBaseline,
  kH1,              // group size disparity only
  kH2_1,            // prevalence disparity on train and test
  kH2_2TrainOnly,   // prevalence disparity on train only
  kH2_2TestOnly,    // prevalence disparity on test only
  kH3,              // group-wise class-conditional separability
  kH4_1,            // train negatives of A flipped to positives
  kH4_2,            // train positives of A flipped to equalize prevalence
};

std::string_view ScenarioKindName(ScenarioKind kind);
absl::StatusOr<ScenarioKind> ParseScenarioKind(std::string_view name);

// Name of the protected column added by every scenario.
inline constexpr char kProtectedColumn[] = "z";

struct BivariateNormal {
  std::array<double, 2> mean{0.0, 0.0};
  // Covariance entries (xx, xy, yy).
  std::array<double, 3> cov{1.0, 0.0, 1.0};
};

// Four bivariate normals, one per (label, group) cell, used to draw the x1/x2
// columns of the separability scenario.
struct SeparabilityScheme {
  // components[label][group], group index 0 = A, 1 = B.
  std::array<std::array<BivariateNormal, 2>, 2> components;

  const BivariateNormal& at(int label, Group g) const {
    return components[label][g == Group::kA ? 0 : 1];
  }
  BivariateNormal& at(int label, Group g) {
    return components[label][g == Group::kA ? 0 : 1];
  }

  absl::Status Validate() const;

  // Fisher discriminant ratio between the classes within group g:
  // d' (S0 + S1)^-1 d with d the difference of the class means.
  double FisherRatio(Group g) const;

  // Identity covariances; B negatives at (0,0), B positives at (3,3); both
  // classes of A at (3,3), so A is inseparable and sits on B's fraud cluster.
  static SeparabilityScheme Default();
};

struct BiasScenario {
  ScenarioKind kind = ScenarioKind::kBaseline;
  // Label used in output file names; defaults to the lower-cased kind.
  std::string name;
  double s_a = 0.5;  // target P[Z=A]
  double c = 1.0;    // target P[Y=1|A] / P[Y=1|B]
  std::optional<SeparabilityScheme> scheme;  // required iff kind == kH3
  std::uint64_t seed = 0;

  absl::Status Validate() const;
  std::string DisplayName() const;
};

struct FlipEntry {
  std::size_t row = 0;
  double old_label = 0.0;
  double new_label = 0.0;
};

// Ground truth for label noise injected into one partition.
struct FlipLog {
  std::vector<FlipEntry> flips;
  Group group = Group::kA;
  // Post-flip group prevalences.
  double prevalence_a = 0.0;
  double prevalence_b = 0.0;
};

// Undoes every flip in `log`; errors if a row no longer holds new_label.
absl::StatusOr<TabularDataset> RevertFlips(const TabularDataset& ds,
                                           const FlipLog& log);

struct PartitionStats {
  std::int64_t n_rows = 0;
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  std::int64_t pos_a = 0;
  std::int64_t pos_b = 0;
  double group_fraction_a = 0.0;
  double prevalence_a = 0.0;
  double prevalence_b = 0.0;
  std::optional<double> prevalence_ratio;  // undefined when prevalence_b = 0
  std::int64_t flips = 0;

  friend bool operator==(const PartitionStats&, const PartitionStats&) =
      default;
};

absl::StatusOr<PartitionStats> ComputePartitionStats(const TabularDataset& ds,
                                                     std::int64_t flips = 0);

struct InjectionManifest {
  BiasScenario scenario;
  std::uint64_t seed = 0;
  PartitionStats train;
  PartitionStats test;
  std::vector<std::string> columns_added;
  std::optional<FlipLog> flip_log;
};

std::string FormatManifest(const InjectionManifest& manifest);
std::string ManifestFileName(const BiasScenario& scenario);

struct InjectionResult {
  TabularDataset train;
  TabularDataset test;
  InjectionManifest manifest;
};

// Appends Z with independent per-row draws, P[Z=A] = s_a.
absl::StatusOr<TabularDataset> AssignGroupsIndependent(const TabularDataset& ds,
                                                       double s_a,
                                                       std::uint64_t seed);

// Conditional assignment probabilities that give P[Z=A] = s_a and
// P[Y=1|A] = c * P[Y=1|B] in expectation, for overall prevalence p.
struct PrevalenceAssignment {
  double p_a = 0.0;
  double p_b = 0.0;
  double prob_a_given_pos = 0.0;
  double prob_a_given_neg = 0.0;
};
absl::StatusOr<PrevalenceAssignment> SolvePrevalenceAssignment(double p,
                                                               double s_a,
                                                               double c);

// Appends Z drawn conditionally on Y (see SolvePrevalenceAssignment).
absl::StatusOr<TabularDataset> AssignGroupsPrevalence(const TabularDataset& ds,
                                                      double s_a, double c,
                                                      std::uint64_t seed);

// Appends x1, x2 drawn from the scheme's (label, group) normal.
absl::StatusOr<TabularDataset> AddSeparabilityFeatures(
    const TabularDataset& ds, const SeparabilityScheme& scheme,
    std::uint64_t seed);

struct FlipResult {
  TabularDataset data;
  FlipLog log;
};

// Flips the fewest negatives of `group` (uniformly chosen) so that its
// prevalence reaches c_target times the other group's.
absl::StatusOr<FlipResult> FlipNegativesToPositives(const TabularDataset& train,
                                                    Group group,
                                                    double c_target,
                                                    std::uint64_t seed);

// Flips positives of the more prevalent group (uniformly chosen) until the
// prevalence gap is as small as possible.
absl::StatusOr<FlipResult> FlipPositivesToNegativesEqualize(
    const TabularDataset& train, std::uint64_t seed);

// One instantiation of a scenario on a train/test pair from the same split.
absl::StatusOr<InjectionResult> ApplyScenario(const TabularDataset& train,
                                              const TabularDataset& test,
                                              const BiasScenario& scenario);

}  // namespace biasforge

#endif  // BIASFORGE_INJECTOR_H_

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

#include "biasforge/auditor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "str_util.h"
#include "biasforge/stats.h"
#include "biasforge/text_format.h"

namespace biasforge {

std::string_view BiasConditionName(BiasCondition condition) {
  switch (condition) {
    case BiasCondition::kGroupSizeDisparity: return "GROUP_SIZE_DISPARITY";
    case BiasCondition::kPrevalenceDisparity: return "PREVALENCE_DISPARITY";
    case BiasCondition::kClassConditionalDisparity:
      return "CLASS_CONDITIONAL_DISPARITY";
    case BiasCondition::kProtectedAttributeBias:
      return "PROTECTED_ATTRIBUTE_BIAS";
  }
  return "UNKNOWN";
}

absl::StatusOr<AuditResult> AuditGroupSize(const TabularDataset& ds,
                                           double alpha) {
  absl::StatusOr<GroupCounts> counts = CountGroups(ds);
  if (!counts.ok()) return counts.status();
  const std::int64_t n = counts->n_a + counts->n_b;
  if (n == 0) return absl::FailedPreconditionError("empty dataset");
  AuditResult r;
  r.condition = BiasCondition::kGroupSizeDisparity;
  r.alpha = alpha;
  r.effect = static_cast<double>(counts->n_a) / n;
  if (counts->n_a == 0 || counts->n_b == 0) {
    r.degenerate = true;
    r.detected = true;
    r.p_value = 0.0;
    r.statistic = std::numeric_limits<double>::infinity();
    return r;
  }
  const double expected = 0.5 * n;
  r.statistic = (counts->n_a - expected) / std::sqrt(0.25 * n);
  r.p_value = n <= 1000 ? stats::ExactBinomialHalfPValue(counts->n_a, n)
                        : stats::TwoSidedNormalPValue(r.statistic);
  r.detected = r.p_value < alpha;
  return r;
}

absl::StatusOr<AuditResult> AuditPrevalence(const TabularDataset& ds,
                                            double alpha) {
  absl::StatusOr<GroupCounts> counts = CountGroups(ds);
  if (!counts.ok()) return counts.status();
  if (counts->n_a == 0 || counts->n_b == 0) {
    return absl::FailedPreconditionError(
        "prevalence audit needs rows in both groups");
  }
  const stats::TestResult t = stats::TwoProportionZ(
      counts->pos_a, counts->n_a, counts->pos_b, counts->n_b);
  AuditResult r;
  r.condition = BiasCondition::kPrevalenceDisparity;
  r.alpha = alpha;
  r.statistic = t.statistic;
  r.p_value = t.p_value;
  r.detected = r.p_value < alpha;
  if (counts->pos_b > 0) {
    r.effect = counts->prevalence(Group::kA) / counts->prevalence(Group::kB);
  }
  return r;
}

absl::StatusOr<AuditResult> AuditClassConditional(const TabularDataset& ds,
                                                  double alpha) {
  if (!ds.has_protected()) {
    return absl::FailedPreconditionError("dataset has no protected column");
  }
  std::vector<std::string> features = ds.FeatureNames();
  if (features.empty()) {
    return absl::FailedPreconditionError(
        "class-conditional audit needs at least one feature");
  }
  std::sort(features.begin(), features.end());
  const double n_tests = 2.0 * static_cast<double>(features.size());
  auto y = ds.labels();
  auto z = ds.groups();

  AuditResult r;
  r.condition = BiasCondition::kClassConditionalDisparity;
  r.alpha = alpha;
  const FeatureTest* best = nullptr;
  for (const std::string& name : features) {
    const Column& col = *ds.Find(name);
    for (int label = 0; label < 2; ++label) {
      std::vector<double> a;
      std::vector<double> b;
      for (std::size_t i = 0; i < ds.num_rows(); ++i) {
        if (y[i] != label) continue;
        (z[i] == kGroupACode ? a : b).push_back(col.values[i]);
      }
      FeatureTest t;
      t.feature = name;
      t.label = label;
      t.n_a = static_cast<std::int64_t>(a.size());
      t.n_b = static_cast<std::int64_t>(b.size());
      t.test = col.type == ColumnType::kReal ? "ks" : "chi2";
      if (t.n_a < kMinCellRows || t.n_b < kMinCellRows) {
        t.skipped = true;
      } else {
        const stats::TestResult res = col.type == ColumnType::kReal
                                          ? stats::KolmogorovSmirnov(a, b)
                                          : stats::ChiSquareTwoSample(a, b);
        t.statistic = res.statistic;
        t.p_value = res.p_value;
        t.corrected_p_value = std::min(1.0, res.p_value * n_tests);
      }
      r.detail.push_back(std::move(t));
    }
  }
  for (const FeatureTest& t : r.detail) {
    if (t.skipped) continue;
    if (best == nullptr ||
        std::tie(t.corrected_p_value, best->statistic) <
            std::tie(best->corrected_p_value, t.statistic)) {
      best = &t;
    }
  }
  if (best != nullptr) {
    r.statistic = best->statistic;
    r.p_value = best->corrected_p_value;
    r.effect = best->statistic;
  }
  r.detected = r.p_value < alpha;
  return r;
}

absl::StatusOr<std::vector<AuditResult>> AuditDataset(const TabularDataset& ds,
                                                      double alpha) {
  absl::StatusOr<AuditResult> size = AuditGroupSize(ds, alpha);
  if (!size.ok()) return size.status();
  absl::StatusOr<AuditResult> prev = AuditPrevalence(ds, alpha);
  if (!prev.ok()) return prev.status();
  absl::StatusOr<AuditResult> cc = AuditClassConditional(ds, alpha);
  if (!cc.ok()) return cc.status();

  AuditResult composite;
  composite.condition = BiasCondition::kProtectedAttributeBias;
  composite.alpha = alpha;
  composite.detected = prev->detected || cc->detected;
  composite.p_value = std::min(prev->p_value, cc->p_value);
  composite.statistic =
      prev->p_value <= cc->p_value ? prev->statistic : cc->statistic;
  return std::vector<AuditResult>{*std::move(size), *std::move(prev),
                                  *std::move(cc), std::move(composite)};
}

std::vector<FeatureTest> RankFeatureTests(std::vector<FeatureTest> detail) {
  std::stable_sort(detail.begin(), detail.end(),
                   [](const FeatureTest& x, const FeatureTest& y) {
                     if (x.skipped != y.skipped) return !x.skipped;
                     if (x.corrected_p_value != y.corrected_p_value) {
                       return x.corrected_p_value < y.corrected_p_value;
                     }
                     return x.statistic > y.statistic;
                   });
  return detail;
}

absl::StatusOr<ProfileComparison> CompareProfiles(
    const std::vector<AuditResult>& train_audit,
    const std::vector<AuditResult>& test_audit) {
  if (train_audit.size() != test_audit.size()) {
    return absl::InvalidArgumentError("audit profiles differ in length");
  }
  ProfileComparison out;
  for (std::size_t i = 0; i < train_audit.size(); ++i) {
    const AuditResult& a = train_audit[i];
    const AuditResult& b = test_audit[i];
    if (a.condition != b.condition) {
      return absl::InvalidArgumentError(
          StrCat("condition mismatch at position ", i, ": ",
                       BiasConditionName(a.condition), " vs ",
                       BiasConditionName(b.condition)));
    }
    if (a.alpha != b.alpha) {
      return absl::InvalidArgumentError("audits use different alpha");
    }
    ConditionDifference d{a.condition, a.detected, b.detected,
                          a.detected != b.detected};
    out.any_differs = out.any_differs || d.differs;
    out.conditions.push_back(d);
  }
  return out;
}

std::string FormatAuditReport(const std::vector<AuditResult>& results) {
  std::string out;
  out += "condition,statistic,p_value,alpha,detected,degenerate,effect\n";
  for (const AuditResult& r : results) {
    StrAppend(&out, BiasConditionName(r.condition), ",",
                    FormatDouble(r.statistic), ",", FormatDouble(r.p_value),
                    ",", FormatDouble(r.alpha), ",", r.detected ? 1 : 0, ",",
                    r.degenerate ? 1 : 0, ",", FormatOptional(r.effect), "\n");
  }
  for (const AuditResult& r : results) {
    if (r.detail.empty()) continue;
    StrAppend(&out, "\n[", BiasConditionName(r.condition), " detail]\n");
    out += "feature,label,test,statistic,p_value,corrected_p_value,n_a,n_b,skipped\n";
    for (const FeatureTest& t : r.detail) {
      StrAppend(&out, t.feature, ",", t.label, ",", t.test, ",",
                      FormatDouble(t.statistic), ",", FormatDouble(t.p_value),
                      ",", FormatDouble(t.corrected_p_value), ",", t.n_a, ",",
                      t.n_b, ",", t.skipped ? 1 : 0, "\n");
    }
  }
  return out;
}

}  // namespace biasforge

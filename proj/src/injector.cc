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

#include "biasforge/injector.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

#include "str_util.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "biasforge/rng.h"
#include "biasforge/text_format.h"

namespace biasforge {
namespace {

constexpr std::pair<ScenarioKind, std::string_view> kKindNames[] = {
    {ScenarioKind::kBaseline, "BASELINE"},
    {ScenarioKind::kH1, "H1"},
    {ScenarioKind::kH2_1, "H2_1"},
    {ScenarioKind::kH2_2TrainOnly, "H2_2_TRAIN_ONLY"},
    {ScenarioKind::kH2_2TestOnly, "H2_2_TEST_ONLY"},
    {ScenarioKind::kH3, "H3"},
    {ScenarioKind::kH4_1, "H4_1"},
    {ScenarioKind::kH4_2, "H4_2"},
};

std::vector<std::size_t> RowsWhere(const TabularDataset& ds, Group group,
                                   double label) {
  std::vector<std::size_t> rows;
  auto y = ds.labels();
  auto z = ds.groups();
  const double code = GroupCode(group);
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    if (z[i] == code && y[i] == label) rows.push_back(i);
  }
  return rows;
}

absl::StatusOr<FlipResult> ApplyFlips(const TabularDataset& ds, Group group,
                                      std::vector<std::size_t> rows,
                                      double new_label) {
  std::sort(rows.begin(), rows.end());
  std::vector<double> labels(ds.labels().begin(), ds.labels().end());
  FlipLog log;
  log.group = group;
  log.flips.reserve(rows.size());
  for (std::size_t row : rows) {
    log.flips.push_back({row, labels[row], new_label});
    labels[row] = new_label;
  }
  absl::StatusOr<TabularDataset> out = ds.WithLabels(std::move(labels));
  if (!out.ok()) return out.status();
  absl::StatusOr<GroupCounts> counts = CountGroups(*out);
  if (!counts.ok()) return counts.status();
  log.prevalence_a = counts->prevalence(Group::kA);
  log.prevalence_b = counts->prevalence(Group::kB);
  return FlipResult{*std::move(out), std::move(log)};
}

std::uint64_t SubSeed(std::uint64_t seed, std::string_view partition,
                      std::string_view step) {
  return DeriveSeed(seed, {HashTag(partition), HashTag(step)});
}

}  // namespace

std::string_view ScenarioKindName(ScenarioKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "UNKNOWN";
}

absl::StatusOr<ScenarioKind> ParseScenarioKind(std::string_view name) {
  std::string upper(name);
  for (char& ch : upper) {
    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (ch == '.' || ch == '-') ch = '_';
  }
  for (const auto& [k, kind_name] : kKindNames) {
    if (kind_name == upper) return k;
  }
  return absl::InvalidArgumentError(
      StrCat("unknown scenario kind '", name, "'"));
}

absl::Status SeparabilityScheme::Validate() const {
  for (int y = 0; y < 2; ++y) {
    for (int g = 0; g < 2; ++g) {
      const auto& cov = components[y][g].cov;
      const double det = cov[0] * cov[2] - cov[1] * cov[1];
      if (!(cov[0] > 0.0) || !(det > 0.0)) {
        return absl::InvalidArgumentError(
            StrCat("covariance for label ", y, " group ",
                         g == 0 ? "A" : "B", " is not positive definite"));
      }
      if (!std::isfinite(components[y][g].mean[0]) ||
          !std::isfinite(components[y][g].mean[1])) {
        return absl::InvalidArgumentError("non-finite scheme mean");
      }
    }
  }
  return absl::OkStatus();
}

double SeparabilityScheme::FisherRatio(Group g) const {
  const BivariateNormal& neg = at(0, g);
  const BivariateNormal& pos = at(1, g);
  const double dx = pos.mean[0] - neg.mean[0];
  const double dy = pos.mean[1] - neg.mean[1];
  const double a = neg.cov[0] + pos.cov[0];
  const double b = neg.cov[1] + pos.cov[1];
  const double d = neg.cov[2] + pos.cov[2];
  const double det = a * d - b * b;
  // d' S^-1 d with S^-1 = [d -b; -b a] / det.
  return (dx * (d * dx - b * dy) + dy * (a * dy - b * dx)) / det;
}

SeparabilityScheme SeparabilityScheme::Default() {
  SeparabilityScheme s;
  s.at(0, Group::kB).mean = {0.0, 0.0};
  s.at(1, Group::kB).mean = {3.0, 3.0};
  s.at(0, Group::kA).mean = {3.0, 3.0};
  s.at(1, Group::kA).mean = {3.0, 3.0};
  return s;
}

absl::Status BiasScenario::Validate() const {
  if (!(s_a > 0.0 && s_a < 1.0)) {
    return absl::InvalidArgumentError(
        StrCat("s_a must be in (0,1), got ", s_a));
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    return absl::InvalidArgumentError(StrCat("c must be > 0, got ", c));
  }
  if (kind == ScenarioKind::kH3) {
    if (!scheme.has_value()) {
      return absl::InvalidArgumentError("H3 requires a separability scheme");
    }
    return scheme->Validate();
  }
  if (scheme.has_value()) {
    return absl::InvalidArgumentError(
        "separability scheme is only valid for H3");
  }
  return absl::OkStatus();
}

std::string BiasScenario::DisplayName() const {
  if (!name.empty()) return name;
  std::string lower(ScenarioKindName(kind));
  for (char& ch : lower) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return lower;
}

absl::StatusOr<TabularDataset> RevertFlips(const TabularDataset& ds,
                                           const FlipLog& log) {
  std::vector<double> labels(ds.labels().begin(), ds.labels().end());
  for (const FlipEntry& e : log.flips) {
    if (e.row >= labels.size() || labels[e.row] != e.new_label) {
      return absl::FailedPreconditionError(
          StrCat("row ", e.row, " does not hold the flipped label"));
    }
    labels[e.row] = e.old_label;
  }
  return ds.WithLabels(std::move(labels));
}

absl::StatusOr<PartitionStats> ComputePartitionStats(const TabularDataset& ds,
                                                     std::int64_t flips) {
  absl::StatusOr<GroupCounts> counts = CountGroups(ds);
  if (!counts.ok()) return counts.status();
  PartitionStats s;
  s.n_rows = static_cast<std::int64_t>(ds.num_rows());
  s.n_a = counts->n_a;
  s.n_b = counts->n_b;
  s.pos_a = counts->pos_a;
  s.pos_b = counts->pos_b;
  s.group_fraction_a =
      s.n_rows == 0 ? 0.0 : static_cast<double>(s.n_a) / s.n_rows;
  s.prevalence_a = counts->prevalence(Group::kA);
  s.prevalence_b = counts->prevalence(Group::kB);
  if (s.prevalence_b > 0.0) s.prevalence_ratio = s.prevalence_a / s.prevalence_b;
  s.flips = flips;
  return s;
}

std::string FormatManifest(const InjectionManifest& m) {
  const BiasScenario& sc = m.scenario;
  std::string out = "# biasforge injection manifest v1\n";
  StrAppend(&out, "scenario: ", sc.DisplayName(), "\n");
  StrAppend(&out, "kind: ", ScenarioKindName(sc.kind), "\n");
  StrAppend(&out, "s_a: ", FormatDouble(sc.s_a), "\n");
  StrAppend(&out, "c: ", FormatDouble(sc.c), "\n");
  StrAppend(&out, "seed: ", m.seed, "\n");
  StrAppend(&out, "columns_added: ", absl::StrJoin(m.columns_added, ","),
                  "\n");
  if (sc.scheme.has_value()) {
    out += "\n[separability_scheme]\nlabel,group,mean_x1,mean_x2,cov_xx,cov_xy,cov_yy\n";
    for (int y = 0; y < 2; ++y) {
      for (Group g : {Group::kA, Group::kB}) {
        const BivariateNormal& mv = sc.scheme->at(y, g);
        StrAppend(&out, y, ",", GroupName(g), ",",
                        FormatDouble(mv.mean[0]), ",", FormatDouble(mv.mean[1]),
                        ",", FormatDouble(mv.cov[0]), ",",
                        FormatDouble(mv.cov[1]), ",", FormatDouble(mv.cov[2]),
                        "\n");
      }
    }
  }
  out +=
      "\n[partition_stats]\npartition,n_rows,n_a,n_b,pos_a,pos_b,"
      "group_fraction_a,prevalence_a,prevalence_b,prevalence_ratio,flips\n";
  for (const auto& [label, s] :
       {std::pair<std::string_view, const PartitionStats&>{"train", m.train},
        {"test", m.test}}) {
    StrAppend(&out, label, ",", s.n_rows, ",", s.n_a, ",", s.n_b, ",",
                    s.pos_a, ",", s.pos_b, ",", FormatDouble(s.group_fraction_a),
                    ",", FormatDouble(s.prevalence_a), ",",
                    FormatDouble(s.prevalence_b), ",",
                    FormatOptional(s.prevalence_ratio), ",", s.flips, "\n");
  }
  if (m.flip_log.has_value()) {
    StrAppend(&out, "\n[flips]\npartition: train\ngroup: ",
                    GroupName(m.flip_log->group), "\ncount: ",
                    m.flip_log->flips.size(), "\nrow,old_label,new_label\n");
    for (const FlipEntry& e : m.flip_log->flips) {
      StrAppend(&out, e.row, ",", e.old_label, ",", e.new_label, "\n");
    }
  }
  return out;
}

std::string ManifestFileName(const BiasScenario& scenario) {
  return StrCat(scenario.DisplayName(), "_", scenario.seed, ".manifest");
}

absl::StatusOr<TabularDataset> AssignGroupsIndependent(const TabularDataset& ds,
                                                       double s_a,
                                                       std::uint64_t seed) {
  if (ds.has_protected()) {
    return absl::FailedPreconditionError("protected column already present");
  }
  if (!(s_a > 0.0 && s_a < 1.0)) {
    return absl::InvalidArgumentError("s_a must be in (0,1)");
  }
  SplitMix64 rng(DeriveSeed(seed, {HashTag("assign_groups")}));
  Column z{kProtectedColumn, ColumnType::kGroup, {}};
  z.values.reserve(ds.num_rows());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    z.values.push_back(rng.Uniform() < s_a ? kGroupACode : kGroupBCode);
  }
  return ds.WithProtected(std::move(z));
}

absl::StatusOr<PrevalenceAssignment> SolvePrevalenceAssignment(double p,
                                                               double s_a,
                                                               double c) {
  if (!(p > 0.0 && p < 1.0)) {
    return absl::InvalidArgumentError(
        StrCat("infeasible: prevalence p=", p, " must be in (0,1)"));
  }
  if (!(s_a > 0.0 && s_a < 1.0)) {
    return absl::InvalidArgumentError(
        StrCat("infeasible: s_a=", s_a, " must be in (0,1)"));
  }
  if (!(c > 0.0)) {
    return absl::InvalidArgumentError(
        StrCat("infeasible: c=", c, " must be > 0"));
  }
  PrevalenceAssignment a;
  a.p_b = p / (s_a * c + 1.0 - s_a);
  a.p_a = c * a.p_b;
  a.prob_a_given_pos = s_a * a.p_a / p;
  a.prob_a_given_neg = s_a * (1.0 - a.p_a) / (1.0 - p);
  if (!(a.p_a > 0.0 && a.p_a < 1.0)) {
    return absl::InvalidArgumentError(
        StrCat("infeasible: p_A=", a.p_a, " must be in (0,1)"));
  }
  if (!(a.p_b > 0.0 && a.p_b < 1.0)) {
    return absl::InvalidArgumentError(
        StrCat("infeasible: p_B=", a.p_b, " must be in (0,1)"));
  }
  if (!(a.prob_a_given_pos >= 0.0 && a.prob_a_given_pos <= 1.0)) {
    return absl::InvalidArgumentError(StrCat(
        "infeasible: P[Z=A|Y=1]=", a.prob_a_given_pos, " must be in [0,1]"));
  }
  if (!(a.prob_a_given_neg >= 0.0 && a.prob_a_given_neg <= 1.0)) {
    return absl::InvalidArgumentError(StrCat(
        "infeasible: P[Z=A|Y=0]=", a.prob_a_given_neg, " must be in [0,1]"));
  }
  return a;
}

absl::StatusOr<TabularDataset> AssignGroupsPrevalence(const TabularDataset& ds,
                                                      double s_a, double c,
                                                      std::uint64_t seed) {
  if (ds.has_protected()) {
    return absl::FailedPreconditionError("protected column already present");
  }
  absl::StatusOr<double> p = Prevalence(ds);
  if (!p.ok()) return p.status();
  absl::StatusOr<PrevalenceAssignment> a = SolvePrevalenceAssignment(*p, s_a, c);
  if (!a.ok()) return a.status();
  // Same stream as AssignGroupsIndependent, so c = 1 reproduces it exactly.
  SplitMix64 rng(DeriveSeed(seed, {HashTag("assign_groups")}));
  auto y = ds.labels();
  Column z{kProtectedColumn, ColumnType::kGroup, {}};
  z.values.reserve(ds.num_rows());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const double prob = y[i] == 1.0 ? a->prob_a_given_pos : a->prob_a_given_neg;
    z.values.push_back(rng.Uniform() < prob ? kGroupACode : kGroupBCode);
  }
  return ds.WithProtected(std::move(z));
}

absl::StatusOr<TabularDataset> AddSeparabilityFeatures(
    const TabularDataset& ds, const SeparabilityScheme& scheme,
    std::uint64_t seed) {
  if (!ds.has_protected()) {
    return absl::FailedPreconditionError(
        "separability features need a protected column");
  }
  if (absl::Status s = scheme.Validate(); !s.ok()) return s;
  SplitMix64 rng(DeriveSeed(seed, {HashTag("separability")}));
  auto y = ds.labels();
  auto z = ds.groups();
  Column x1{"x1", ColumnType::kReal, std::vector<double>(ds.num_rows())};
  Column x2{"x2", ColumnType::kReal, std::vector<double>(ds.num_rows())};
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const BivariateNormal& mv =
        scheme.at(y[i] == 1.0 ? 1 : 0, GroupFromCode(z[i]));
    // Cholesky factor of the 2x2 covariance.
    const double l11 = std::sqrt(mv.cov[0]);
    const double l21 = mv.cov[1] / l11;
    const double l22 = std::sqrt(mv.cov[2] - l21 * l21);
    const double n1 = rng.Normal();
    const double n2 = rng.Normal();
    x1.values[i] = mv.mean[0] + l11 * n1;
    x2.values[i] = mv.mean[1] + l21 * n1 + l22 * n2;
  }
  absl::StatusOr<TabularDataset> out = ds.WithColumn(std::move(x1));
  if (!out.ok()) return out.status();
  return out->WithColumn(std::move(x2));
}

absl::StatusOr<FlipResult> FlipNegativesToPositives(const TabularDataset& train,
                                                    Group group,
                                                    double c_target,
                                                    std::uint64_t seed) {
  if (!(c_target > 0.0) || !std::isfinite(c_target)) {
    return absl::InvalidArgumentError("c_target must be > 0");
  }
  absl::StatusOr<GroupCounts> counts = CountGroups(train);
  if (!counts.ok()) return counts.status();
  const Group other = OtherGroup(group);
  const std::int64_t n_g = counts->n(group);
  const std::int64_t pos_g = counts->pos(group);
  if (n_g == 0 || counts->n(other) == 0) {
    return absl::FailedPreconditionError("both groups must be non-empty");
  }
  if (pos_g == 0 && counts->pos(other) == 0) {
    return absl::FailedPreconditionError(
        "prevalence ratio undefined: no positives in either group");
  }
  const double target = c_target * counts->prevalence(other);
  auto reached = [&](std::int64_t k) {
    return static_cast<double>(pos_g + k) / static_cast<double>(n_g) >= target;
  };
  std::int64_t k = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::ceil(target * n_g)) - pos_g);
  while (k > 0 && reached(k - 1)) --k;
  while (!reached(k) && pos_g + k <= n_g) ++k;
  const std::int64_t negatives = n_g - pos_g;
  if (k > negatives || !reached(k)) {
    return absl::FailedPreconditionError(StrCat(
        "target ratio ", c_target, " unreachable: needs ", k,
        " flips but group ", GroupName(group), " has ", negatives,
        " negatives"));
  }
  std::vector<std::size_t> pool = RowsWhere(train, group, 0.0);
  SplitMix64 rng(DeriveSeed(seed, {HashTag("flip_negatives")}));
  std::vector<std::size_t> chosen =
      SampleWithoutReplacement(pool, static_cast<std::size_t>(k), rng);
  return ApplyFlips(train, group, std::move(chosen), 1.0);
}

absl::StatusOr<FlipResult> FlipPositivesToNegativesEqualize(
    const TabularDataset& train, std::uint64_t seed) {
  absl::StatusOr<GroupCounts> counts = CountGroups(train);
  if (!counts.ok()) return counts.status();
  if (counts->n_a == 0 || counts->n_b == 0) {
    return absl::FailedPreconditionError("both groups must be non-empty");
  }
  // Compare pos_a/n_a with pos_b/n_b exactly on integers.
  const Group high = counts->pos_a * counts->n_b >= counts->pos_b * counts->n_a
                         ? Group::kA
                         : Group::kB;
  const Group low = OtherGroup(high);
  const std::int64_t n_h = counts->n(high);
  const std::int64_t pos_h = counts->pos(high);
  const double p_low = counts->prevalence(low);
  const double ideal = pos_h - n_h * p_low;
  auto gap = [&](std::int64_t k) {
    return std::abs(static_cast<double>(pos_h - k) / n_h - p_low);
  };
  std::int64_t lo = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::floor(ideal)), 0, pos_h);
  std::int64_t hi = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::ceil(ideal)), 0, pos_h);
  const std::int64_t k = gap(hi) < gap(lo) ? hi : lo;

  std::vector<std::size_t> pool = RowsWhere(train, high, 1.0);
  SplitMix64 rng(DeriveSeed(seed, {HashTag("flip_positives")}));
  std::vector<std::size_t> chosen =
      SampleWithoutReplacement(pool, static_cast<std::size_t>(k), rng);
  return ApplyFlips(train, high, std::move(chosen), 0.0);
}

absl::StatusOr<InjectionResult> ApplyScenario(const TabularDataset& train,
                                              const TabularDataset& test,
                                              const BiasScenario& scenario) {
  if (absl::Status s = scenario.Validate(); !s.ok()) return s;
  const std::uint64_t seed = scenario.seed;
  auto independent = [&](const TabularDataset& ds, std::string_view part,
                         double s_a) {
    return AssignGroupsIndependent(ds, s_a, SubSeed(seed, part, "groups"));
  };
  auto conditioned = [&](const TabularDataset& ds, std::string_view part) {
    return AssignGroupsPrevalence(ds, scenario.s_a, scenario.c,
                                  SubSeed(seed, part, "groups"));
  };

  absl::StatusOr<TabularDataset> out_train = absl::UnknownError("unset");
  absl::StatusOr<TabularDataset> out_test = absl::UnknownError("unset");
  std::optional<FlipLog> flip_log;
  std::vector<std::string> added = {kProtectedColumn};

  switch (scenario.kind) {
    case ScenarioKind::kBaseline:
      out_train = independent(train, "train", 0.5);
      out_test = independent(test, "test", 0.5);
      break;
    case ScenarioKind::kH1:
    case ScenarioKind::kH3:
    case ScenarioKind::kH4_1:
      out_train = independent(train, "train", scenario.s_a);
      out_test = independent(test, "test", scenario.s_a);
      break;
    case ScenarioKind::kH2_1:
    case ScenarioKind::kH4_2:
      out_train = conditioned(train, "train");
      out_test = conditioned(test, "test");
      break;
    case ScenarioKind::kH2_2TrainOnly:
      out_train = conditioned(train, "train");
      out_test = independent(test, "test", scenario.s_a);
      break;
    case ScenarioKind::kH2_2TestOnly:
      out_train = independent(train, "train", scenario.s_a);
      out_test = conditioned(test, "test");
      break;
  }
  if (!out_train.ok()) return out_train.status();
  if (!out_test.ok()) return out_test.status();

  if (scenario.kind == ScenarioKind::kH3) {
    out_train = AddSeparabilityFeatures(*out_train, *scenario.scheme,
                                        SubSeed(seed, "train", "features"));
    if (!out_train.ok()) return out_train.status();
    out_test = AddSeparabilityFeatures(*out_test, *scenario.scheme,
                                       SubSeed(seed, "test", "features"));
    if (!out_test.ok()) return out_test.status();
    added.push_back("x1");
    added.push_back("x2");
  } else if (scenario.kind == ScenarioKind::kH4_1 ||
             scenario.kind == ScenarioKind::kH4_2) {
    absl::StatusOr<FlipResult> flipped =
        scenario.kind == ScenarioKind::kH4_1
            ? FlipNegativesToPositives(*out_train, Group::kA, scenario.c,
                                       SubSeed(seed, "train", "flips"))
            : FlipPositivesToNegativesEqualize(*out_train,
                                               SubSeed(seed, "train", "flips"));
    if (!flipped.ok()) return flipped.status();
    out_train = std::move(flipped->data);
    flip_log = std::move(flipped->log);
  }

  InjectionManifest manifest;
  manifest.scenario = scenario;
  manifest.seed = seed;
  manifest.columns_added = std::move(added);
  const std::int64_t n_flips =
      flip_log.has_value() ? static_cast<std::int64_t>(flip_log->flips.size())
                           : 0;
  absl::StatusOr<PartitionStats> train_stats =
      ComputePartitionStats(*out_train, n_flips);
  if (!train_stats.ok()) return train_stats.status();
  absl::StatusOr<PartitionStats> test_stats = ComputePartitionStats(*out_test);
  if (!test_stats.ok()) return test_stats.status();
  manifest.train = *train_stats;
  manifest.test = *test_stats;
  manifest.flip_log = std::move(flip_log);
  return InjectionResult{*std::move(out_train), *std::move(out_test),
                         std::move(manifest)};
}

}  // namespace biasforge

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

#include "biasforge/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>

#include "str_util.h"

namespace biasforge {
namespace {

std::optional<double> Rate(std::int64_t num, std::int64_t den) {
  if (den <= 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> Positive(std::optional<double> v) {
  if (!v || !(*v > 0.0)) return std::nullopt;
  return v;
}

double Odds(double p) { return p / (1.0 - p); }

}  // namespace

std::optional<double> ConfusionCounts::prevalence() const {
  return Rate(positives(), total());
}
std::optional<double> ConfusionCounts::fpr() const {
  return Rate(fp, negatives());
}
std::optional<double> ConfusionCounts::fnr() const {
  return Rate(fn, positives());
}
std::optional<double> ConfusionCounts::tpr() const {
  return Rate(tp, positives());
}
std::optional<double> ConfusionCounts::ppv() const { return Rate(tp, tp + fp); }

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

absl::StatusOr<double> ThresholdAtGlobalFpr(std::span<const double> scores,
                                            std::span<const double> labels,
                                            double target_fpr) {
  if (scores.size() != labels.size()) {
    return absl::InvalidArgumentError("scores and labels differ in length");
  }
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
    return absl::InvalidArgumentError("target FPR must lie in (0, 1)");
  }
  std::vector<double> neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] < 0.5) neg.push_back(scores[i]);
  }
  if (neg.empty()) {
    return absl::InvalidArgumentError("threshold needs at least one negative");
  }
  std::sort(neg.begin(), neg.end());
  const double n = static_cast<double>(neg.size());
  // Walk distinct negative scores upward; FP(s) = #{neg > s} only shrinks.
  for (std::size_t i = 0; i < neg.size();) {
    std::size_t j = i;
    while (j < neg.size() && neg[j] == neg[i]) ++j;
    const double fp = static_cast<double>(neg.size() - j);
    if (fp / n <= target_fpr) return neg[i];
    i = j;
  }
  return neg.back();
}

ConfusionCounts ConfusionAt(std::span<const double> scores,
                            std::span<const double> labels, double threshold) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    if (labels[i] > 0.5) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

absl::StatusOr<std::pair<GroupConfusion, GroupConfusion>> GroupConfusionAt(
    std::span<const double> scores, std::span<const double> labels,
    std::span<const double> groups, double threshold) {
  if (scores.size() != labels.size() || scores.size() != groups.size()) {
    return absl::InvalidArgumentError("scores, labels and groups misaligned");
  }
  GroupConfusion a;
  a.group = Group::kA;
  GroupConfusion b;
  b.group = Group::kB;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    GroupConfusion& c = GroupFromCode(groups[i]) == Group::kA ? a : b;
    const bool predicted = scores[i] > threshold;
    if (labels[i] > 0.5) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  if (a.total() == 0 || b.total() == 0) {
    return absl::FailedPreconditionError(StrCat(
        "group ", a.total() == 0 ? "A" : "B", " is empty"));
  }
  return std::make_pair(a, b);
}

std::optional<double> Log2Ratio(std::optional<double> a,
                                std::optional<double> b) {
  a = Positive(a);
  b = Positive(b);
  if (!a || !b) return std::nullopt;
  return std::log2(*a) - std::log2(*b);
}

bool WithinEightyRule(double log2_ratio) {
  return std::abs(log2_ratio) <= kEightyRuleBand + 1e-12;
}

FairnessRatios ComputeFairnessRatios(const GroupConfusion& a,
                                     const GroupConfusion& b) {
  FairnessRatios r;
  auto note = [&r](std::string_view name, const GroupConfusion& c,
                   std::optional<double> v) {
    if (!v) {
      r.degenerate.push_back(
          StrCat(name, "_", GroupName(c.group), "=undefined"));
    } else if (!(*v > 0.0)) {
      r.degenerate.push_back(StrCat(name, "_", GroupName(c.group), "=0"));
    }
  };
  for (const GroupConfusion* c : {&a, &b}) {
    note("FPR", *c, c->fpr());
    note("FNR", *c, c->fnr());
    note("PPV", *c, c->ppv());
  }
  r.log2_fpr_ratio = Log2Ratio(a.fpr(), b.fpr());
  r.log2_fnr_ratio = Log2Ratio(a.fnr(), b.fnr());
  r.log2_ppv_ratio = Log2Ratio(a.ppv(), b.ppv());
  if (r.log2_fpr_ratio) r.eighty_rule_fpr = WithinEightyRule(*r.log2_fpr_ratio);
  if (r.log2_fnr_ratio) r.eighty_rule_fnr = WithinEightyRule(*r.log2_fnr_ratio);
  return r;
}

absl::StatusOr<FprDecomposition> DecomposeFprRatio(const GroupConfusion& a,
                                                   const GroupConfusion& b) {
  for (const GroupConfusion* c : {&a, &b}) {
    const std::string g(GroupName(c->group));
    const std::optional<double> p = c->prevalence();
    if (!p || *p <= 0.0 || *p >= 1.0) {
      return absl::FailedPreconditionError(
          StrCat("prevalence of group ", g, " is degenerate"));
    }
    const std::optional<double> ppv = c->ppv();
    if (!ppv || *ppv <= 0.0 || *ppv >= 1.0) {
      return absl::FailedPreconditionError(
          StrCat("PPV of group ", g, " is degenerate"));
    }
    const std::optional<double> fnr = c->fnr();
    if (!fnr || *fnr >= 1.0) {
      return absl::FailedPreconditionError(
          StrCat("FNR of group ", g, " is degenerate"));
    }
  }
  FprDecomposition d;
  d.prevalence_odds = Odds(*a.prevalence()) / Odds(*b.prevalence());
  d.imprecision_odds = (1.0 / Odds(*a.ppv())) / (1.0 / Odds(*b.ppv()));
  d.recall = (1.0 - *a.fnr()) / (1.0 - *b.fnr());
  d.fpr_ratio = *a.fpr() / *b.fpr();
  d.product = d.prevalence_odds * d.imprecision_odds * d.recall;
  d.residual = std::abs(d.product - d.fpr_ratio) / d.fpr_ratio;
  return d;
}

std::optional<double> RocAuc(std::span<const double> scores,
                             std::span<const double> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] < scores[j];
  });
  double n_pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double pos_in_block = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] > 0.5) pos_in_block += 1.0;
      ++j;
    }
    // Average 1-based rank of the tie block.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += pos_in_block * avg_rank;
    n_pos += pos_in_block;
    i = j;
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

absl::StatusOr<FairnessReport> EvaluateScores(std::span<const double> scores,
                                              std::span<const double> labels,
                                              std::span<const double> groups,
                                              double target_fpr) {
  FairnessReport r;
  r.target_fpr = target_fpr;
  absl::StatusOr<double> t = ThresholdAtGlobalFpr(scores, labels, target_fpr);
  if (!t.ok()) return t.status();
  r.threshold = *t;
  absl::StatusOr<std::pair<GroupConfusion, GroupConfusion>> groups_conf =
      GroupConfusionAt(scores, labels, groups, r.threshold);
  if (!groups_conf.ok()) return groups_conf.status();
  r.a = groups_conf->first;
  r.b = groups_conf->second;
  r.global = r.a;
  r.global += r.b;
  r.ratios = ComputeFairnessRatios(r.a, r.b);
  if (absl::StatusOr<FprDecomposition> d = DecomposeFprRatio(r.a, r.b);
      d.ok()) {
    r.decomposition = *d;
  }
  r.auc = RocAuc(scores, labels);
  for (Group g : {Group::kA, Group::kB}) {
    std::vector<double> s;
    std::vector<double> y;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (GroupFromCode(groups[i]) == g) {
        s.push_back(scores[i]);
        y.push_back(labels[i]);
      }
    }
    (g == Group::kA ? r.auc_a : r.auc_b) = RocAuc(s, y);
  }
  return r;
}

std::vector<EvaluatedRun> SelectTopPerSeed(std::vector<EvaluatedRun> runs) {
  auto abs_ratio = [](const EvaluatedRun& r) {
    const std::optional<double>& v = r.report.ratios.log2_fpr_ratio;
    return v ? std::abs(*v) : std::numeric_limits<double>::infinity();
  };
  auto better = [&](const EvaluatedRun& x, const EvaluatedRun& y) {
    if (x.report.tpr() != y.report.tpr()) return x.report.tpr() > y.report.tpr();
    const double ax = abs_ratio(x);
    const double ay = abs_ratio(y);
    if (ax != ay) return ax < ay;
    return x.spec_id < y.spec_id;
  };
  std::map<std::uint64_t, EvaluatedRun> best;
  for (EvaluatedRun& run : runs) {
    auto it = best.find(run.seed);
    if (it == best.end()) {
      best.emplace(run.seed, std::move(run));
    } else if (better(run, it->second)) {
      it->second = std::move(run);
    }
  }
  std::vector<EvaluatedRun> out;
  out.reserve(best.size());
  for (auto& [seed, run] : best) out.push_back(std::move(run));
  return out;
}

Summary Summarize(const std::vector<std::optional<double>>& values) {
  Summary s;
  std::vector<double> defined;
  for (const std::optional<double>& v : values) {
    if (v) {
      defined.push_back(*v);
    } else {
      ++s.n_undefined;
    }
  }
  s.n_defined = static_cast<int>(defined.size());
  if (defined.empty()) return s;
  std::sort(defined.begin(), defined.end());
  const std::size_t n = defined.size();
  s.min = defined.front();
  s.max = defined.back();
  s.median = n % 2 == 1 ? defined[n / 2]
                        : 0.5 * (defined[n / 2 - 1] + defined[n / 2]);
  return s;
}

absl::StatusOr<AggregateResult> AggregateErrorBars(
    std::vector<EvaluatedRun> top_runs) {
  if (top_runs.empty()) {
    return absl::InvalidArgumentError("aggregation needs at least one seed");
  }
  std::sort(top_runs.begin(), top_runs.end(),
            [](const EvaluatedRun& x, const EvaluatedRun& y) {
              return x.seed < y.seed;
            });
  AggregateResult agg;
  agg.target_fpr = top_runs.front().report.target_fpr;
  std::vector<std::optional<double>> tpr, fpr, fnr, ppv, auc_a, auc_b;
  for (const EvaluatedRun& r : top_runs) {
    tpr.push_back(r.report.tpr());
    fpr.push_back(r.report.ratios.log2_fpr_ratio);
    fnr.push_back(r.report.ratios.log2_fnr_ratio);
    ppv.push_back(r.report.ratios.log2_ppv_ratio);
    auc_a.push_back(r.report.auc_a);
    auc_b.push_back(r.report.auc_b);
  }
  agg.tpr = Summarize(tpr);
  agg.log2_fpr_ratio = Summarize(fpr);
  agg.log2_fnr_ratio = Summarize(fnr);
  agg.log2_ppv_ratio = Summarize(ppv);
  agg.auc_a = Summarize(auc_a);
  agg.auc_b = Summarize(auc_b);
  agg.undefined = agg.log2_fpr_ratio.n_defined == 0 &&
                  agg.log2_fnr_ratio.n_defined == 0 &&
                  agg.log2_ppv_ratio.n_defined == 0;
  agg.top_runs = std::move(top_runs);
  return agg;
}

}  // namespace biasforge

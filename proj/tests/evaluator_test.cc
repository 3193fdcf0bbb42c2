// Copyright 2026 The BiasForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biasforge/evaluator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "biasforge/rng.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace biasforge {
namespace {

using ::testing::HasSubstr;

GroupConfusion Conf(Group g, std::int64_t tp, std::int64_t fp, std::int64_t tn,
                    std::int64_t fn) {
  GroupConfusion c;
  c.group = g;
  c.tp = tp;
  c.fp = fp;
  c.tn = tn;
  c.fn = fn;
  return c;
}

// Brute-force sweep: every distinct score and -inf as a candidate cut,
// FP counted by a full scan. Returns the smallest negative score that
// attains the largest feasible FPR.
double SweepOracle(const std::vector<double>& s, const std::vector<double>& y,
                   double target) {
  std::set<double> candidates(s.begin(), s.end());
  candidates.insert(-std::numeric_limits<double>::infinity());
  double n_neg = 0;
  for (double v : y) n_neg += v < 0.5;
  auto fpr_at = [&](double t) {
    double fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) fp += y[i] < 0.5 && s[i] > t;
    return fp / n_neg;
  };
  double best = -1;
  for (double t : candidates) {
    const double f = fpr_at(t);
    if (f <= target) best = std::max(best, f);
  }
  double answer = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] < 0.5 && fpr_at(s[i]) == best) answer = std::min(answer, s[i]);
  }
  return answer;
}

TEST(ThresholdTest, FourNegativesHalfTarget) {
  std::vector<double> s = {0.1, 0.2, 0.3, 0.4, 0.9};
  std::vector<double> y = {0, 0, 0, 0, 1};
  auto t = ThresholdAtGlobalFpr(s, y, 0.5);
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(*t, 0.2);
  EXPECT_EQ(*ConfusionAt(s, y, *t).fpr(), 0.5);
}

TEST(ThresholdTest, HundredNegativesHitTargetExactly) {
  SplitMix64 rng(1);
  std::vector<double> s(130), y(130, 0.0);
  for (double& v : s) v = rng.Uniform();
  std::fill(y.begin() + 100, y.end(), 1.0);
  auto t = ThresholdAtGlobalFpr(s, y, 0.05);
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(*t, SweepOracle(s, y, 0.05));
  EXPECT_DOUBLE_EQ(*ConfusionAt(s, y, *t).fpr(), 0.05);
}

TEST(ThresholdTest, TiedNegativesCannotBeSplit) {
  std::vector<double> s = {0.7, 0.7, 0.7, 0.7, 0.9};
  std::vector<double> y = {0, 0, 0, 0, 1};
  auto t = ThresholdAtGlobalFpr(s, y, 0.5);
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(*ConfusionAt(s, y, *t).fpr(), 0.0);
  EXPECT_EQ(*ConfusionAt(s, y, *t).tpr(), 1.0);
}

TEST(ThresholdTest, Errors) {
  std::vector<double> s = {0.1, 0.2};
  EXPECT_FALSE(ThresholdAtGlobalFpr(s, std::vector<double>{1, 1}, 0.05).ok());
  EXPECT_FALSE(ThresholdAtGlobalFpr(s, std::vector<double>{0, 1}, 0.0).ok());
  EXPECT_FALSE(ThresholdAtGlobalFpr(s, std::vector<double>{0}, 0.05).ok());
}

TEST(ThresholdProperty, MatchesSweepAndStaysFeasible) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.UniformIndex(80);
    const int levels = 1 + static_cast<int>(rng.UniformIndex(30));
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.UniformIndex(levels)) / levels;
      y[i] = rng.Bernoulli(0.3);
    }
    y[0] = 0.0;
    const double target = rng.Uniform(0.01, 0.99);
    auto t = ThresholdAtGlobalFpr(s, y, target);
    ASSERT_TRUE(t.ok());
    EXPECT_EQ(*t, SweepOracle(s, y, target));
    ConfusionCounts c = ConfusionAt(s, y, *t);
    EXPECT_LE(*c.fpr(), target);
    // Within one tie block (plus one) of the target.
    std::vector<double> neg;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] < 0.5) neg.push_back(s[i]);
    }
    std::size_t max_tie = 0;
    for (double v : neg) {
      max_tie = std::max<std::size_t>(max_tie,
                                      std::count(neg.begin(), neg.end(), v));
    }
    EXPECT_LT(target - *c.fpr(), (1.0 + max_tie) / neg.size());
    // A looser ceiling never lowers TPR.
    auto t2 = ThresholdAtGlobalFpr(s, y, std::min(0.999, target + 0.1));
    ASSERT_TRUE(t2.ok());
    EXPECT_GE(ConfusionAt(s, y, *t2).tpr().value_or(0),
              c.tpr().value_or(0));
  }
}

// Eight rows: A has TP1 FP1 TN2 FN0; B has TP0 FP2 TN1 FN1.
struct EightRows {
  std::vector<double> scores = {0.9, 0.8, 0.1, 0.2, 0.7, 0.6, 0.3, 0.2};
  std::vector<double> labels = {1, 0, 0, 0, 0, 0, 0, 1};
  std::vector<double> groups = {1, 1, 1, 1, 0, 0, 0, 0};
};

TEST(GroupConfusionTest, HandCountedEightRows) {
  EightRows d;
  auto conf = GroupConfusionAt(d.scores, d.labels, d.groups, 0.5);
  ASSERT_TRUE(conf.ok());
  const auto& [a, b] = *conf;
  EXPECT_EQ(a, Conf(Group::kA, 1, 1, 2, 0));
  EXPECT_EQ(b, Conf(Group::kB, 0, 2, 1, 1));
  EXPECT_DOUBLE_EQ(*a.fpr(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(*b.fpr(), 2.0 / 3.0);
  EXPECT_EQ(*a.fnr(), 0.0);
  EXPECT_EQ(*b.fnr(), 1.0);
  ConfusionCounts sum = a;
  sum += b;
  EXPECT_EQ(sum, ConfusionAt(d.scores, d.labels, 0.5));
}

TEST(GroupConfusionTest, IdenticalGroupsMatch) {
  std::vector<double> s = {0.1, 0.5, 0.9, 0.1, 0.5, 0.9};
  std::vector<double> y = {0, 1, 1, 0, 1, 1};
  std::vector<double> z = {1, 1, 1, 0, 0, 0};
  auto conf = GroupConfusionAt(s, y, z, 0.3);
  ASSERT_TRUE(conf.ok());
  EXPECT_EQ(static_cast<ConfusionCounts>(conf->first),
            static_cast<ConfusionCounts>(conf->second));
}

TEST(GroupConfusionTest, EmptyGroupAndUndefinedRates) {
  std::vector<double> s = {0.1, 0.9};
  std::vector<double> y = {1, 1};
  auto empty = GroupConfusionAt(s, y, std::vector<double>{1, 1}, 0.5);
  ASSERT_FALSE(empty.ok());
  EXPECT_THAT(std::string(empty.status().message()), HasSubstr("group B"));
  auto no_neg = GroupConfusionAt(s, y, std::vector<double>{1, 0}, 0.5);
  ASSERT_TRUE(no_neg.ok());
  EXPECT_FALSE(no_neg->first.fpr().has_value());
  EXPECT_FALSE(no_neg->first.ppv().has_value());
}

TEST(PartitionProperty, GroupsSumToGlobal) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.UniformIndex(200);
    std::vector<double> s(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.Uniform();
      y[i] = rng.Bernoulli(0.2);
      z[i] = rng.Bernoulli(0.5);
    }
    z[0] = 1;
    z[1] = 0;
    const double t = rng.Uniform();
    auto conf = GroupConfusionAt(s, y, z, t);
    ASSERT_TRUE(conf.ok());
    ConfusionCounts sum = conf->first;
    sum += conf->second;
    EXPECT_EQ(sum, ConfusionAt(s, y, t));
  }
}

TEST(FairnessRatiosTest, DoubledFpr) {
  // FPR_A = 10/100, FPR_B = 5/100.
  FairnessRatios r = ComputeFairnessRatios(Conf(Group::kA, 5, 10, 90, 5),
                                           Conf(Group::kB, 5, 5, 95, 5));
  ASSERT_TRUE(r.log2_fpr_ratio.has_value());
  EXPECT_DOUBLE_EQ(*r.log2_fpr_ratio, 1.0);
  EXPECT_FALSE(*r.eighty_rule_fpr);
  EXPECT_EQ(*r.log2_fnr_ratio, 0.0);
  EXPECT_TRUE(*r.eighty_rule_fnr);
}

TEST(FairnessRatiosTest, EqualConfusionsAreBalanced) {
  FairnessRatios r = ComputeFairnessRatios(Conf(Group::kA, 3, 4, 5, 6),
                                           Conf(Group::kB, 3, 4, 5, 6));
  EXPECT_EQ(*r.log2_fpr_ratio, 0.0);
  EXPECT_EQ(*r.log2_fnr_ratio, 0.0);
  EXPECT_EQ(*r.log2_ppv_ratio, 0.0);
  EXPECT_TRUE(*r.eighty_rule_fpr);
  EXPECT_TRUE(*r.eighty_rule_fnr);
  EXPECT_TRUE(r.degenerate.empty());
}

TEST(FairnessRatiosTest, EightyRuleBoundaryIsInclusive) {
  // FPR_A = 0.05, FPR_B = 0.0625: ratio 0.8.
  FairnessRatios r = ComputeFairnessRatios(Conf(Group::kA, 1, 5, 95, 1),
                                           Conf(Group::kB, 1, 5, 75, 1));
  EXPECT_NEAR(*r.log2_fpr_ratio, -0.32193, 5e-6);
  EXPECT_NEAR(*r.log2_fpr_ratio, std::log2(0.8), 1e-15);
  EXPECT_TRUE(*r.eighty_rule_fpr);
  EXPECT_NEAR(kEightyRuleBand, std::log2(1.25), 1e-16);
  EXPECT_TRUE(WithinEightyRule(std::log2(1.25)));
  EXPECT_FALSE(WithinEightyRule(std::log2(1.2501)));
}

TEST(FairnessRatiosTest, ZeroRatesAreUndefinedNotInfinite) {
  FairnessRatios r = ComputeFairnessRatios(Conf(Group::kA, 2, 0, 10, 0),
                                           Conf(Group::kB, 2, 3, 10, 1));
  EXPECT_FALSE(r.log2_fpr_ratio.has_value());
  EXPECT_FALSE(r.log2_fnr_ratio.has_value());
  EXPECT_FALSE(r.eighty_rule_fpr.has_value());
  EXPECT_TRUE(r.log2_ppv_ratio.has_value());
  EXPECT_THAT(r.degenerate, ::testing::ElementsAre("FPR_A=0", "FNR_A=0"));
}

TEST(FairnessRatiosProperty, SwappingGroupsNegatesExactly) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    auto draw = [&](Group g) {
      return Conf(g, 1 + rng.UniformIndex(50), 1 + rng.UniformIndex(50),
                  1 + rng.UniformIndex(500), 1 + rng.UniformIndex(50));
    };
    GroupConfusion a = draw(Group::kA);
    GroupConfusion b = draw(Group::kB);
    FairnessRatios ab = ComputeFairnessRatios(a, b);
    FairnessRatios ba = ComputeFairnessRatios(b, a);
    EXPECT_EQ(*ab.log2_fpr_ratio, -*ba.log2_fpr_ratio);
    EXPECT_EQ(*ab.log2_fnr_ratio, -*ba.log2_fnr_ratio);
    EXPECT_EQ(*ab.log2_ppv_ratio, -*ba.log2_ppv_ratio);
  }
}

TEST(DecompositionTest, PrevalenceOddsDriveRatio) {
  // Substituting p_A = 0.02, p_B = 0.01 with equal PPV and FNR.
  const double want = (0.02 / 0.98) / (0.01 / 0.99);
  EXPECT_NEAR(want, 2.0204, 5e-5);
  EXPECT_NEAR(std::log2(want), 1.0147, 1e-4);
  // Brute-force confusions with those rates: 10000 rows per group,
  // PPV = 0.5 and FNR = 0.5 in both.
  GroupConfusion a = Conf(Group::kA, 100, 100, 9700, 100);
  GroupConfusion b = Conf(Group::kB, 50, 50, 9850, 50);
  auto d = DecomposeFprRatio(a, b);
  ASSERT_TRUE(d.ok());
  EXPECT_NEAR(d->fpr_ratio, want, 1e-12);
  EXPECT_NEAR(d->prevalence_odds, want, 1e-12);
  EXPECT_DOUBLE_EQ(d->imprecision_odds, 1.0);
  EXPECT_DOUBLE_EQ(d->recall, 1.0);
  EXPECT_LT(d->residual, 1e-12);
}

TEST(DecompositionTest, IdenticalGroupsFactorToOne) {
  auto d = DecomposeFprRatio(Conf(Group::kA, 4, 3, 20, 2),
                             Conf(Group::kB, 4, 3, 20, 2));
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->prevalence_odds, 1.0);
  EXPECT_EQ(d->imprecision_odds, 1.0);
  EXPECT_EQ(d->recall, 1.0);
  EXPECT_EQ(d->fpr_ratio, 1.0);
}

TEST(DecompositionTest, EightRowsFactors) {
  // A: p = 1/4, PPV = 1/2, FNR = 0. B: p = 1/4, PPV = 0, FNR = 1, so B's
  // factors are degenerate and the error names them.
  auto bad = DecomposeFprRatio(Conf(Group::kA, 1, 1, 2, 0),
                               Conf(Group::kB, 0, 2, 1, 1));
  ASSERT_FALSE(bad.ok());
  EXPECT_THAT(std::string(bad.status().message()),
              HasSubstr("PPV of group B"));
  // The same FPRs (1/3 vs 2/3) with defined factors: product is 0.5.
  auto d = DecomposeFprRatio(Conf(Group::kA, 1, 1, 2, 1),
                             Conf(Group::kB, 1, 2, 1, 1));
  ASSERT_TRUE(d.ok());
  EXPECT_DOUBLE_EQ(d->fpr_ratio, 0.5);
  EXPECT_NEAR(d->product, 0.5, 1e-15);
  EXPECT_LT(d->residual, 1e-12);
}

TEST(DecompositionProperty, ResidualVanishesOnRandomCounts) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    auto draw = [&](Group g) {
      return Conf(g, 1 + rng.UniformIndex(1000), 1 + rng.UniformIndex(5000),
                  rng.UniformIndex(100000), rng.UniformIndex(1000));
    };
    auto d = DecomposeFprRatio(draw(Group::kA), draw(Group::kB));
    ASSERT_TRUE(d.ok());
    EXPECT_LE(d->residual, 1e-9);
  }
}

TEST(RocAucTest, MatchesPairCounting) {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.UniformIndex(100);
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.UniformIndex(10));
      y[i] = rng.Bernoulli(0.4);
    }
    y[0] = 0;
    y[1] = 1;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] > 0.5 && y[j] < 0.5) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
      }
    }
    EXPECT_NEAR(*RocAuc(s, y), wins / pairs, 1e-12);
  }
  EXPECT_FALSE(RocAuc(std::vector<double>{1, 2}, std::vector<double>{1, 1})
                   .has_value());
}

TEST(EvaluateScoresTest, ReportIsConsistent) {
  SplitMix64 rng(7);
  const std::size_t n = 5000;
  std::vector<double> s(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.Bernoulli(0.1);
    z[i] = rng.Bernoulli(0.4);
    s[i] = 1.0 / (1.0 + std::exp(-(rng.Normal() + 2.0 * y[i] + 0.3 * z[i])));
  }
  auto r = EvaluateScores(s, y, z, 0.05);
  ASSERT_TRUE(r.ok());
  EXPECT_LE(r->fpr(), 0.05);
  EXPECT_GT(r->tpr(), 0.0);
  ASSERT_TRUE(r->decomposition.has_value());
  EXPECT_LE(r->decomposition->residual, 1e-9);
  EXPECT_NEAR(std::log2(r->decomposition->product), *r->ratios.log2_fpr_ratio,
              1e-9);
  ConfusionCounts sum = r->a;
  sum += r->b;
  EXPECT_EQ(sum, r->global);
  EXPECT_GT(*r->auc, 0.8);
  EXPECT_TRUE(r->auc_a.has_value() && r->auc_b.has_value());
}

EvaluatedRun MakeRun(std::uint64_t seed, std::string id, double tpr,
                 std::optional<double> log2_fpr) {
  EvaluatedRun r;
  r.seed = seed;
  r.spec_id = std::move(id);
  // TPR = tp / 1000.
  r.report.global.tp = static_cast<std::int64_t>(std::llround(tpr * 1000));
  r.report.global.fn = 1000 - r.report.global.tp;
  r.report.ratios.log2_fpr_ratio = log2_fpr;
  return r;
}

TEST(SelectTopPerSeedTest, TieBreaks) {
  auto top = SelectTopPerSeed({MakeRun(1, "x", 0.6, 0.5), MakeRun(1, "y", 0.5, 0.0)});
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].spec_id, "x");

  top = SelectTopPerSeed({MakeRun(1, "x", 0.6, 0.1), MakeRun(1, "y", 0.6, -0.4)});
  EXPECT_EQ(top[0].spec_id, "x");

  top = SelectTopPerSeed({MakeRun(1, "b", 0.6, std::nullopt),
                          MakeRun(1, "c", 0.6, 2.0), MakeRun(1, "a", 0.6, -2.0)});
  EXPECT_EQ(top[0].spec_id, "a");

  top = SelectTopPerSeed({MakeRun(3, "only", 0.2, std::nullopt)});
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].spec_id, "only");
}

TEST(SelectTopPerSeedTest, OnePerSeedIndependentOfOrder) {
  std::vector<EvaluatedRun> runs;
  SplitMix64 rng(8);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (int k = 0; k < 6; ++k) {
      runs.push_back(MakeRun(seed, "s" + std::to_string(k),
                         rng.UniformIndex(4) / 4.0, rng.Uniform(-1, 1)));
    }
  }
  auto top = SelectTopPerSeed(runs);
  Shuffle(std::span<EvaluatedRun>(runs), rng);
  auto again = SelectTopPerSeed(runs);
  ASSERT_EQ(top.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(top[i].seed, i);
    EXPECT_EQ(top[i].spec_id, again[i].spec_id);
  }
}

TEST(SummarizeTest, MedianMinMax) {
  Summary s = Summarize({-0.1, 0.0, 0.3});
  EXPECT_EQ(*s.median, 0.0);
  EXPECT_EQ(*s.min, -0.1);
  EXPECT_EQ(*s.max, 0.3);
  s = Summarize({0.7});
  EXPECT_EQ(*s.median, 0.7);
  EXPECT_EQ(*s.min, 0.7);
  EXPECT_EQ(*s.max, 0.7);
  s = Summarize({1.0, std::nullopt, 2.0, 4.0, 3.0});
  EXPECT_EQ(*s.median, 2.5);
  EXPECT_EQ(s.n_defined, 4);
  EXPECT_EQ(s.n_undefined, 1);
  s = Summarize({std::nullopt});
  EXPECT_FALSE(s.median.has_value());
}

TEST(AggregateErrorBarsTest, ConsistentWithRuns) {
  auto agg = AggregateErrorBars({MakeRun(2, "a", 0.5, 0.3), MakeRun(0, "b", 0.7, -0.1),
                                 MakeRun(1, "c", 0.6, 0.0)});
  ASSERT_TRUE(agg.ok());
  EXPECT_EQ(*agg->log2_fpr_ratio.median, 0.0);
  EXPECT_EQ(*agg->log2_fpr_ratio.min, -0.1);
  EXPECT_EQ(*agg->log2_fpr_ratio.max, 0.3);
  EXPECT_DOUBLE_EQ(*agg->tpr.median, 0.6);
  EXPECT_FALSE(agg->undefined);
  EXPECT_EQ(agg->top_runs.front().seed, 0u);

  auto undefined = AggregateErrorBars({MakeRun(0, "a", 0.5, std::nullopt)});
  ASSERT_TRUE(undefined.ok());
  EXPECT_TRUE(undefined->undefined);
  EXPECT_FALSE(AggregateErrorBars({}).ok());
}

}  // namespace
}  // namespace biasforge

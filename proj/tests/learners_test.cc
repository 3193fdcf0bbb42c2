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

#include "biasforge/learners.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "biasforge/base_synth.h"
#include "biasforge/evaluator.h"
#include "biasforge/injector.h"
#include "biasforge/rng.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace biasforge {
namespace {

using ::biasforge::testing::MakeDataset;

ModelSpec SmallSpec(Algorithm algorithm, bool aware = false,
                    std::uint64_t seed = 1) {
  ModelSpec spec;
  spec.algorithm = algorithm;
  spec.aware = aware;
  spec.seed = seed;
  switch (algorithm) {
    case Algorithm::kLogReg:
      spec.params = LogRegParams{0.05, 1e-4, 10};
      break;
    case Algorithm::kTree:
      spec.params = TreeParams{6, 20};
      break;
    case Algorithm::kForest:
      spec.params = ForestParams{25, 8, 0.6, true, 5};
      break;
    case Algorithm::kGbt:
      spec.params = GbtParams{60, 0.1, 4, 0.8, 20, 1.0};
      break;
  }
  return spec;
}

std::pair<TabularDataset, TabularDataset> BaseSplit(std::uint64_t seed,
                                                    std::int64_t n = 20000) {
  BaseConfig cfg;
  cfg.n_rows = n;
  cfg.base_prevalence = 0.03;
  cfg.seed = seed;
  auto split = TemporalSplit(*GenerateBaseDataset(cfg), 0.75);
  EXPECT_TRUE(split.ok());
  return *std::move(split);
}

TabularDataset WithGroups(const TabularDataset& ds, std::uint64_t seed) {
  return *AssignGroupsIndependent(ds, 0.5, seed);
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TEST(AlgorithmTest, NamesRoundTrip) {
  for (Algorithm a : kAllAlgorithms) {
    EXPECT_EQ(*ParseAlgorithm(AlgorithmName(a)), a);
  }
  EXPECT_EQ(*ParseAlgorithm("gbt"), Algorithm::kGbt);
  EXPECT_FALSE(ParseAlgorithm("MLP").ok());
}

TEST(SampleHyperparamsTest, FiftyLogRegSpecsInGrid) {
  auto specs = SampleHyperparams(Algorithm::kLogReg, 50, 7);
  ASSERT_TRUE(specs.ok());
  ASSERT_EQ(specs->size(), 50u);
  for (const ModelSpec& s : *specs) EXPECT_TRUE(s.InGrid()) << s.id;
  EXPECT_EQ(specs->front().id, "LOGREG-000");
  EXPECT_EQ(specs->back().id, "LOGREG-049");
}

TEST(SampleHyperparamsTest, EveryAlgorithmStaysInGrid) {
  for (Algorithm a : kAllAlgorithms) {
    auto specs = SampleHyperparams(a, 200, 11);
    ASSERT_TRUE(specs.ok());
    for (const ModelSpec& s : *specs) {
      ASSERT_TRUE(s.InGrid()) << s.id;
      EXPECT_EQ(s.algorithm, a);
    }
  }
  auto one = SampleHyperparams(Algorithm::kGbt, 1, 3);
  ASSERT_TRUE(one.ok());
  EXPECT_EQ(one->size(), 1u);
  EXPECT_FALSE(SampleHyperparams(Algorithm::kGbt, 0, 3).ok());
  EXPECT_FALSE(SampleHyperparams(static_cast<Algorithm>(9), 1, 3).ok());
}

TEST(SampleHyperparamsTest, DeterministicAndSpread) {
  auto a = SampleHyperparams(Algorithm::kForest, 30, 5);
  auto b = SampleHyperparams(Algorithm::kForest, 30, 5);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a, *b);
  // Log-uniform learning rates land on both sides of the geometric midpoint.
  auto lr = SampleHyperparams(Algorithm::kLogReg, 400, 6);
  int low = 0;
  for (const ModelSpec& s : *lr) {
    low += std::get<LogRegParams>(s.params).learning_rate < 1e-2;
  }
  EXPECT_NEAR(low, 200, 60);
}

TEST(ModelSpecTest, ValidateVersusGrid) {
  ModelSpec spec = SmallSpec(Algorithm::kTree);
  spec.params = TreeParams{1, 1};
  EXPECT_TRUE(spec.Validate().ok());
  EXPECT_FALSE(spec.InGrid());
  spec.params = LogRegParams{};
  EXPECT_FALSE(spec.Validate().ok());
  spec = SmallSpec(Algorithm::kForest);
  std::get<ForestParams>(spec.params).feature_fraction = 0.0;
  EXPECT_FALSE(spec.Validate().ok());
  spec = SmallSpec(Algorithm::kGbt);
  std::get<GbtParams>(spec.params).subsample = 1.5;
  EXPECT_FALSE(spec.Validate().ok());
}

TEST(FitTest, LogRegSeparatesToyData) {
  TabularDataset ds =
      MakeDataset({0, 0, 1, 1}, {}, {{"x", {-5, -4.5, 5, 4.5}}});
  ModelSpec spec;
  spec.params = LogRegParams{0.1, 1e-4, 50};
  auto model = Fit(spec, ds);
  ASSERT_TRUE(model.ok()) << model.status();
  auto scores = *model->Predict(ds);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(scores[i] > 0.5, ds.labels()[i] > 0.5);
  }
}

TEST(FitTest, DepthOneTreeMissesXor) {
  TabularDataset ds =
      MakeDataset({0, 1, 1, 0}, {}, {{"a", {0, 0, 1, 1}}, {"b", {0, 1, 0, 1}}});
  ModelSpec spec;
  spec.algorithm = Algorithm::kTree;
  spec.params = TreeParams{1, 1};
  auto model = Fit(spec, ds);
  ASSERT_TRUE(model.ok());
  auto scores = *model->Predict(ds);
  int correct = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    correct += (scores[i] > 0.5) == (ds.labels()[i] > 0.5);
  }
  EXPECT_LE(correct, 3);
}

TEST(FitTest, SingleClassRejected) {
  TabularDataset ds = MakeDataset({0, 0, 0}, {}, {{"x", {1, 2, 3}}});
  for (Algorithm a : kAllAlgorithms) {
    EXPECT_FALSE(Fit(SmallSpec(a), ds).ok());
  }
}

TEST(FitTest, AwareNeedsProtectedColumn) {
  TabularDataset ds = MakeDataset({0, 1, 0, 1}, {}, {{"x", {1, 2, 3, 4}}});
  EXPECT_FALSE(Fit(SmallSpec(Algorithm::kLogReg, true), ds).ok());
}

TEST(FitTest, FeatureListTracksAwareness) {
  TabularDataset ds =
      MakeDataset({0, 1, 0, 1}, {1, 0, 1, 0}, {{"x", {1, 2, 3, 4}}});
  for (Algorithm a : kAllAlgorithms) {
    auto blind = Fit(SmallSpec(a, false), ds);
    auto aware = Fit(SmallSpec(a, true), ds);
    ASSERT_TRUE(blind.ok() && aware.ok());
    EXPECT_THAT(blind->features(), ::testing::ElementsAre("x"));
    EXPECT_THAT(aware->features(), ::testing::ElementsAre("x", "z"));
  }
}

TEST(FitTest, NonConvergenceIsFlaggedNotFatal) {
  auto [train, test] = BaseSplit(3, 4000);
  ModelSpec spec;
  spec.params = LogRegParams{1e-3, 1e-6, 2};
  auto model = Fit(spec, train);
  ASSERT_TRUE(model.ok());
  EXPECT_FALSE(model->info().converged);
  EXPECT_EQ(model->info().iterations, 2);
  EXPECT_EQ(model->info().loss_trace.size(), 2u);
}

TEST(PredictTest, ConstantFeaturesGiveEqualScores) {
  TabularDataset train =
      MakeDataset({0, 1, 0, 1, 0, 0}, {}, {{"x", {1, 1, 1, 1, 1, 1}}});
  for (Algorithm a : kAllAlgorithms) {
    ModelSpec spec = SmallSpec(a);
    if (a == Algorithm::kGbt) std::get<GbtParams>(spec.params).min_leaf = 1;
    auto model = Fit(spec, train);
    ASSERT_TRUE(model.ok());
    auto s = *model->Predict(train);
    for (double v : s) EXPECT_EQ(v, s[0]) << AlgorithmName(a);
  }
}

TEST(PredictTest, ZeroLinearModelScoresHalf) {
  ModelSpec spec;
  TrainedModel model(spec, {"x"}, {}, LinearParams{{0.0}, {1.0}, {0.0}, 0.0},
                     {}, 0.0);
  TabularDataset ds = MakeDataset({0, 1, 0}, {}, {{"x", {-3, 0, 8}}});
  auto scores = model.Predict(ds);
  ASSERT_TRUE(scores.ok());
  for (double s : *scores) EXPECT_EQ(s, 0.5);
}

TEST(PredictTest, MissingFeatureIsError) {
  TabularDataset train =
      MakeDataset({0, 1, 0, 1}, {}, {{"x", {1, 2, 3, 4}}});
  auto model = Fit(SmallSpec(Algorithm::kLogReg), train);
  ASSERT_TRUE(model.ok());
  TabularDataset other = MakeDataset({0, 1}, {}, {{"w", {1, 2}}});
  EXPECT_FALSE(model->Predict(other).ok());
}

TEST(PredictTest, ScoresBoundedAndReproducible) {
  auto [train, test] = BaseSplit(4, 8000);
  for (Algorithm a : kAllAlgorithms) {
    auto m1 = Fit(SmallSpec(a), train);
    auto m2 = Fit(SmallSpec(a), train);
    ASSERT_TRUE(m1.ok() && m2.ok());
    EXPECT_EQ(*m1, *m2);
    auto s1 = *m1->Predict(test);
    EXPECT_EQ(s1, *m1->Predict(test));
    for (double v : s1) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(LearnerProperty, UnawareModelsIgnoreGroupPermutation) {
  auto [train, test] = BaseSplit(5, 6000);
  TabularDataset gtrain = *AssignGroupsPrevalence(train, 0.5, 2.0, 1);
  TabularDataset gtest = WithGroups(test, 2);
  SplitMix64 rng(3);
  for (Algorithm a : kAllAlgorithms) {
    auto model = Fit(SmallSpec(a), gtrain);
    ASSERT_TRUE(model.ok());
    auto base = *model->Predict(gtest);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> z(gtest.groups().begin(), gtest.groups().end());
      Shuffle(std::span<double>(z), rng);
      EXPECT_EQ(*model->Predict(*gtest.WithGroups(z)), base);
    }
  }
}

TEST(LearnerProperty, SingleUnbaggedForestIsATree) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto [train, test] = BaseSplit(10 + seed, 4000);
    ModelSpec tree;
    tree.algorithm = Algorithm::kTree;
    tree.params = TreeParams{5, 10};
    tree.seed = seed;
    ModelSpec forest = tree;
    forest.algorithm = Algorithm::kForest;
    forest.params = ForestParams{1, 5, 1.0, false, 10};
    auto t = Fit(tree, train);
    auto f = Fit(forest, train);
    ASSERT_TRUE(t.ok() && f.ok());
    EXPECT_EQ(*t->Predict(test), *f->Predict(test));
  }
}

TEST(LearnerProperty, SeparatedBaseDataIsLearnable) {
  for (Algorithm a : kAllAlgorithms) {
    std::vector<double> aucs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto [train, test] = BaseSplit(20 + seed);
      auto model = Fit(SmallSpec(a, false, seed), train);
      ASSERT_TRUE(model.ok());
      aucs.push_back(*RocAuc(*model->Predict(test), test.labels()));
    }
    EXPECT_GT(Median(aucs), 0.7) << AlgorithmName(a);
  }
}

// Group A sits on B's positive cluster, so the Bayes boundary in
// (x1, x2, z) is not linear and boosting should beat the linear model.
TEST(LearnerProperty, BoostingBeatsLinearOnNonlinearBoundary) {
  std::vector<double> gbt, lin;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto [train, test] = BaseSplit(30 + seed);
    BiasScenario sc;
    sc.kind = ScenarioKind::kH3;
    sc.scheme = SeparabilityScheme::Default();
    sc.seed = seed;
    auto injected = ApplyScenario(train, test, sc);
    ASSERT_TRUE(injected.ok());
    ModelSpec g = SmallSpec(Algorithm::kGbt, true, seed);
    std::get<GbtParams>(g.params).n_rounds = 100;
    auto gm = Fit(g, injected->train);
    auto lm = Fit(SmallSpec(Algorithm::kLogReg, true, seed), injected->train);
    ASSERT_TRUE(gm.ok() && lm.ok());
    gbt.push_back(*RocAuc(*gm->Predict(injected->test), injected->test.labels()));
    lin.push_back(*RocAuc(*lm->Predict(injected->test), injected->test.labels()));
  }
  EXPECT_GT(Median(gbt), Median(lin));
}

TEST(GbtTest, LossTraceFallsAndMatchesRounds) {
  auto [train, test] = BaseSplit(40, 8000);
  ModelSpec spec = SmallSpec(Algorithm::kGbt);
  auto model = Fit(spec, train);
  ASSERT_TRUE(model.ok());
  const auto& trace = model->info().loss_trace;
  ASSERT_EQ(trace.size(), 60u);
  EXPECT_EQ(model->trees().size(), 60u);
  EXPECT_LT(trace.back(), trace.front());
  // Balanced positive weight puts the starting log-odds at zero, so the
  // first entry is the weighted loss of a constant 0.5: log 2.
  EXPECT_NEAR(model->base_score(), 0.0, 1e-12);
  EXPECT_NEAR(trace.front(), std::log(2.0), 1e-12);
}

}  // namespace
}  // namespace biasforge

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

#include "biasforge/model_io.h"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "biasforge/base_synth.h"
#include "biasforge/injector.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace biasforge {
namespace {

using ::testing::HasSubstr;

TabularDataset TrainingData() {
  BaseConfig cfg;
  cfg.n_rows = 4000;
  cfg.base_prevalence = 0.05;
  cfg.seed = 11;
  return *AssignGroupsIndependent(*GenerateBaseDataset(cfg), 0.5, 12);
}

ModelSpec SpecFor(Algorithm algorithm) {
  ModelSpec spec;
  spec.id = std::string(AlgorithmName(algorithm)) + "-007";
  spec.algorithm = algorithm;
  spec.aware = true;
  spec.seed = 0xfeedfacecafebeefULL;
  switch (algorithm) {
    case Algorithm::kLogReg:
      spec.params = LogRegParams{0.037, 3.3e-5, 4};
      break;
    case Algorithm::kTree:
      spec.params = TreeParams{5, 13};
      break;
    case Algorithm::kForest:
      spec.params = ForestParams{7, 6, 0.55, true, 5};
      break;
    case Algorithm::kGbt:
      spec.params = GbtParams{15, 0.13, 3, 0.7, 17, 0.9};
      break;
  }
  return spec;
}

class ModelIoTest : public ::testing::TestWithParam<Algorithm> {};

TEST_P(ModelIoTest, RoundTripIsBitExact) {
  const TabularDataset ds = TrainingData();
  auto model = Fit(SpecFor(GetParam()), ds);
  ASSERT_TRUE(model.ok()) << model.status();
  const std::string text = SerializeModel(*model);
  EXPECT_EQ(text.rfind(std::string(kModelMagic) + " 1\n", 0), 0u);
  auto back = ParseModel(text);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_TRUE(*back == *model);
  EXPECT_EQ(SerializeModel(*back), text);
  auto a = model->Predict(ds);
  auto b = back->Predict(ds);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a, *b);
}

TEST_P(ModelIoTest, FileRoundTrip) {
  auto model = Fit(SpecFor(GetParam()), TrainingData());
  ASSERT_TRUE(model.ok());
  const std::string path =
      (std::filesystem::temp_directory_path() /
       ("bf_model_" + std::string(AlgorithmName(GetParam())) + ".txt"))
          .string();
  ASSERT_TRUE(SaveModel(*model, path).ok());
  auto back = LoadModel(path);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_TRUE(*back == *model);
  std::remove(path.c_str());
}

TEST_P(ModelIoTest, HyperparametersRoundTrip) {
  const Hyperparameters params = SpecFor(GetParam()).params;
  auto back = ParseHyperparameters(GetParam(), FormatHyperparameters(params));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, params);
}

INSTANTIATE_TEST_SUITE_P(AllAlgorithms, ModelIoTest,
                         ::testing::ValuesIn(kAllAlgorithms),
                         [](const auto& info) {
                           return std::string(AlgorithmName(info.param));
                         });

TEST(ModelIoErrorTest, RejectsBadHeader) {
  auto model = Fit(SpecFor(Algorithm::kTree), TrainingData());
  ASSERT_TRUE(model.ok());
  std::string text = SerializeModel(*model);

  std::string bad_magic = text;
  bad_magic.replace(0, 8, "notmodel");
  EXPECT_FALSE(ParseModel(bad_magic).ok());

  std::string bad_version = text;
  bad_version.replace(kModelMagic.size() + 1, 1, "9");
  auto v = ParseModel(bad_version);
  ASSERT_FALSE(v.ok());
  EXPECT_THAT(std::string(v.status().message()), HasSubstr("version"));

  EXPECT_FALSE(ParseModel(text.substr(0, text.size() / 2)).ok());
  EXPECT_FALSE(ParseModel(text + "extra 1\n").ok());
  EXPECT_FALSE(LoadModel("/nonexistent/dir/model.txt").ok());
}

TEST(ModelIoErrorTest, HyperparameterErrors) {
  auto unknown = ParseHyperparameters(Algorithm::kTree, "max_depth=3;bogus=1");
  ASSERT_FALSE(unknown.ok());
  EXPECT_THAT(std::string(unknown.status().message()), HasSubstr("bogus"));
  EXPECT_FALSE(ParseHyperparameters(Algorithm::kTree, "max_depth=x").ok());
  EXPECT_FALSE(
      ParseHyperparameters(Algorithm::kTree, "max_depth=3;max_depth=4").ok());
  EXPECT_EQ(FormatHyperparameters(GbtParams{120, 0.05, 4, 0.8, 20, 1.0}),
            "n_rounds=120;learning_rate=0.05;max_depth=4;subsample=0.8;"
            "min_leaf=20;l2=1");
}

}  // namespace
}  // namespace biasforge

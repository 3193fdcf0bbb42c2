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

#ifndef BIASFORGE_MODEL_IO_H_
#define BIASFORGE_MODEL_IO_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "biasforge/learners.h"

namespace biasforge {

inline constexpr std::string_view kModelMagic = "biasforge-model";
inline constexpr int kModelFormatVersion = 1;

// Line-oriented text form. Doubles use the shortest round-trip
// representation, so ParseModel(SerializeModel(m)) == m bit for bit.
std::string SerializeModel(const TrainedModel& model);
absl::StatusOr<TrainedModel> ParseModel(std::string_view text);

absl::Status SaveModel(const TrainedModel& model, const std::string& path);
absl::StatusOr<TrainedModel> LoadModel(const std::string& path);

// Hyperparameters as "key=value" pairs joined by ';', e.g.
// "n_rounds=120;learning_rate=0.05;max_depth=4;subsample=0.8".
std::string FormatHyperparameters(const Hyperparameters& params);
absl::StatusOr<Hyperparameters> ParseHyperparameters(Algorithm algorithm,
                                                     std::string_view text);

}  // namespace biasforge

#endif  // BIASFORGE_MODEL_IO_H_

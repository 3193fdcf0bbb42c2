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

#ifndef BIASFORGE_EXPERIMENT_H_
#define BIASFORGE_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "biasforge/auditor.h"
#include "biasforge/base_synth.h"
#include "biasforge/dataset.h"
#include "biasforge/evaluator.h"
#include "biasforge/injector.h"
#include "biasforge/learners.h"

namespace biasforge {

struct ExperimentConfig {
  BaseConfig base;
  double train_fraction = 0.75;
  // Scenario templates; their seed fields are ignored and derived per
  // replicate from master_seed.
  std::vector<BiasScenario> scenarios;
  int replicates = 10;
  std::vector<Algorithm> algorithms = {std::begin(kAllAlgorithms),
                                       std::end(kAllAlgorithms)};
  int configs_per_algorithm = 50;
  // true = aware. Evaluated in the listed order.
  std::vector<bool> awareness_modes = {true, false};
  std::vector<double> target_fprs = {kDefaultTargetFpr};
  double audit_alpha = kDefaultAlpha;
  std::uint64_t master_seed = 0;
  std::string output_dir = "biasforge_out";
  // Worker cap; 0 means one per hardware thread. BIASFORGE_THREADS, when
  // set, lowers it further.
  int threads = 0;

  absl::Status Validate() const;
};

// Parses the YAML config format documented in README.md.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(std::string_view yaml);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);
// YAML that ParseExperimentConfig reads back to an equal config.
std::string FormatExperimentConfig(const ExperimentConfig& cfg);

// Pure function of (master seed, scenario index, replicate index).
std::uint64_t InjectionSeed(std::uint64_t master_seed,
                            std::size_t scenario_index, int replicate);

// Hyperparameter draws shared by every cell of a run.
using SpecTable = std::map<Algorithm, std::vector<ModelSpec>>;
absl::StatusOr<SpecTable> SampleSpecTable(const ExperimentConfig& cfg);

// Seed of one fit: the spec's own seed mixed with the injection seed.
std::uint64_t FitSeed(const ModelSpec& spec, std::uint64_t injection_seed);

struct RunRecord {
  std::size_t scenario_index = 0;
  std::string scenario;
  int replicate = 0;
  std::uint64_t injection_seed = 0;
  Algorithm algorithm = Algorithm::kLogReg;
  std::string spec_id;
  std::string hyperparameters;
  bool aware = false;
  bool converged = true;
  FairnessReport report;
};

struct CellOutcome {
  std::size_t scenario_index = 0;
  int replicate = 0;
  std::uint64_t injection_seed = 0;
  std::string scenario;
  absl::Status status;
  std::optional<InjectionManifest> manifest;
  std::vector<AuditResult> train_audit;
  std::vector<AuditResult> test_audit;
  std::vector<RunRecord> records;
};

struct BaseSplit {
  TabularDataset train;
  TabularDataset test;
};

absl::StatusOr<BaseSplit> PrepareBase(const ExperimentConfig& cfg);

// Everything for one (scenario, replicate): inject, audit, fit every spec in
// every awareness mode, evaluate at every target FPR. Errors are captured in
// the returned status; records of fits that succeeded are kept.
CellOutcome RunCell(const ExperimentConfig& cfg, const BaseSplit& base,
                    const SpecTable& specs, std::size_t scenario_index,
                    int replicate);

struct RunSummary {
  // Ordered by (scenario index, replicate).
  std::vector<CellOutcome> cells;
  std::vector<AggregateResult> aggregates;
  int failed_cells = 0;

  int exit_code() const { return failed_cells > 0 ? 1 : 0; }
};

// Per (scenario, algorithm, awareness, target FPR): top model per replicate
// and the error-bar summary. Groups without any record are skipped.
std::vector<AggregateResult> AggregateCells(const ExperimentConfig& cfg,
                                            const std::vector<CellOutcome>& cells);

std::string FormatResultsCsv(const std::vector<CellOutcome>& cells);
std::string FormatAggregateCsv(const std::vector<AggregateResult>& aggregates);
std::string FormatAuditCsv(const std::vector<CellOutcome>& cells);
std::string FormatRunSummary(const RunSummary& summary);

// One CSV per (ratio metric, target FPR) with median/min/max coordinates and
// the 80% rule band. Returns the written paths.
absl::StatusOr<std::vector<std::string>> EmitPlotData(
    const std::vector<AggregateResult>& aggregates,
    const std::string& output_dir);

// Runs every cell on a bounded worker pool and writes all outputs under
// cfg.output_dir. Fails only on configuration or output errors; cell
// failures are reported through RunSummary::failed_cells.
absl::StatusOr<RunSummary> RunExperiment(const ExperimentConfig& cfg);

// Worker count after applying cfg.threads and BIASFORGE_THREADS.
int ResolveThreadCount(const ExperimentConfig& cfg);

}  // namespace biasforge

#endif  // BIASFORGE_EXPERIMENT_H_

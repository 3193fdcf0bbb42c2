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

// Command-line front end: gen, inject, audit, train-eval and run.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "biasforge/auditor.h"
#include "biasforge/base_synth.h"
#include "biasforge/dataset.h"
#include "biasforge/evaluator.h"
#include "biasforge/experiment.h"
#include "biasforge/injector.h"
#include "biasforge/learners.h"
#include "biasforge/model_io.h"

namespace {

using namespace biasforge;  // NOLINT

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

int Report(const absl::Status& status, int code) {
  std::cerr << "error: " << status.message() << "\n";
  return code;
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::PermissionDeniedError("cannot write " + path);
  out << text;
  out.close();
  if (!out) return absl::DataLossError("write failed: " + path);
  return absl::OkStatus();
}

absl::StatusOr<TabularDataset> LoadDataset(const std::string& path) {
  absl::StatusOr<std::vector<std::string>> header = ReadCsvHeader(path);
  if (!header.ok()) return header.status();
  return LoadCsv(path, DatasetSchema::FromHeader(*header, "y", "t",
                                                 std::string(kProtectedColumn)));
}

struct BaseFlags {
  std::optional<std::string> config;
  std::optional<std::int64_t> n_rows;
  std::optional<double> prevalence;
  std::optional<double> separation;
  std::optional<std::uint64_t> seed;

  void Register(CLI::App* app) {
    app->add_option("--config", config, "experiment config; its base section is used");
    app->add_option("--n-rows", n_rows, "number of rows");
    app->add_option("--prevalence", prevalence, "base prevalence");
    app->add_option("--class-separation", separation, "class separation");
    app->add_option("--base-seed", seed, "base dataset seed");
  }

  absl::StatusOr<ExperimentConfig> Resolve() const {
    ExperimentConfig cfg;
    if (config) {
      absl::StatusOr<ExperimentConfig> loaded = LoadExperimentConfig(*config);
      if (!loaded.ok()) return loaded.status();
      cfg = *loaded;
    }
    if (n_rows) cfg.base.n_rows = *n_rows;
    if (prevalence) cfg.base.base_prevalence = *prevalence;
    if (separation) cfg.base.class_separation = *separation;
    if (seed) cfg.base.seed = *seed;
    if (absl::Status s = cfg.base.Validate(); !s.ok()) return s;
    return cfg;
  }
};

int RunGen(const BaseFlags& flags, const std::string& output) {
  absl::StatusOr<ExperimentConfig> cfg = flags.Resolve();
  if (!cfg.ok()) return Report(cfg.status(), kExitConfig);
  absl::StatusOr<TabularDataset> ds = GenerateBaseDataset(cfg->base);
  if (!ds.ok()) return Report(ds.status(), kExitFailed);
  if (absl::Status s = WriteCsv(*ds, output); !s.ok()) {
    return Report(s, kExitFailed);
  }
  std::cout << "wrote " << ds->num_rows() << " rows to " << output << "\n";
  return kExitOk;
}

struct InjectFlags {
  std::string kind = "BASELINE";
  double s_a = 0.5;
  double c = 1.0;
  std::uint64_t seed = 1;
  std::string output = ".";
};

int RunInject(const BaseFlags& base_flags, const InjectFlags& flags) {
  absl::StatusOr<ExperimentConfig> cfg = base_flags.Resolve();
  if (!cfg.ok()) return Report(cfg.status(), kExitConfig);
  absl::StatusOr<ScenarioKind> kind = ParseScenarioKind(flags.kind);
  if (!kind.ok()) return Report(kind.status(), kExitConfig);
  BiasScenario scenario;
  scenario.kind = *kind;
  scenario.s_a = flags.s_a;
  scenario.c = flags.c;
  scenario.seed = flags.seed;
  if (*kind == ScenarioKind::kH3) scenario.scheme = SeparabilityScheme::Default();
  if (absl::Status s = scenario.Validate(); !s.ok()) {
    return Report(s, kExitConfig);
  }
  absl::StatusOr<BaseSplit> base = PrepareBase(*cfg);
  if (!base.ok()) return Report(base.status(), kExitFailed);
  absl::StatusOr<InjectionResult> inj =
      ApplyScenario(base->train, base->test, scenario);
  if (!inj.ok()) return Report(inj.status(), kExitFailed);
  std::error_code ec;
  std::filesystem::create_directories(flags.output, ec);
  const std::filesystem::path dir(flags.output);
  const std::string stem =
      scenario.DisplayName() + "_" + std::to_string(scenario.seed);
  for (absl::Status s :
       {WriteCsv(inj->train, (dir / (stem + "_train.csv")).string()),
        WriteCsv(inj->test, (dir / (stem + "_test.csv")).string()),
        WriteText((dir / ManifestFileName(scenario)).string(),
                  FormatManifest(inj->manifest))}) {
    if (!s.ok()) return Report(s, kExitFailed);
  }
  std::cout << FormatManifest(inj->manifest);
  return kExitOk;
}

int RunAudit(const std::string& input, double alpha,
             const std::optional<std::string>& output) {
  absl::StatusOr<TabularDataset> ds = LoadDataset(input);
  if (!ds.ok()) return Report(ds.status(), kExitFailed);
  absl::StatusOr<std::vector<AuditResult>> audit = AuditDataset(*ds, alpha);
  if (!audit.ok()) return Report(audit.status(), kExitFailed);
  const std::string report = FormatAuditReport(*audit);
  if (output) {
    if (absl::Status s = WriteText(*output, report); !s.ok()) {
      return Report(s, kExitFailed);
    }
  }
  std::cout << report;
  return kExitOk;
}

struct TrainEvalFlags {
  std::string train;
  std::string test;
  std::string algorithm = "LOGREG";
  std::string params;
  bool aware = false;
  std::uint64_t seed = 1;
  std::vector<double> target_fprs = {kDefaultTargetFpr};
  std::optional<std::string> output;
  std::optional<std::string> model_out;
};

int RunTrainEval(const TrainEvalFlags& flags) {
  absl::StatusOr<Algorithm> algorithm = ParseAlgorithm(flags.algorithm);
  if (!algorithm.ok()) return Report(algorithm.status(), kExitConfig);
  absl::StatusOr<Hyperparameters> params =
      ParseHyperparameters(*algorithm, flags.params);
  if (!params.ok()) return Report(params.status(), kExitConfig);
  ModelSpec spec;
  spec.id = std::string(AlgorithmName(*algorithm)) + "-cli";
  spec.algorithm = *algorithm;
  spec.params = *params;
  spec.aware = flags.aware;
  spec.seed = flags.seed;
  if (absl::Status s = spec.Validate(); !s.ok()) return Report(s, kExitConfig);
  for (double t : flags.target_fprs) {
    if (!(t > 0.0 && t < 1.0)) {
      return Report(absl::InvalidArgumentError("target FPR must be in (0,1)"),
                    kExitConfig);
    }
  }

  absl::StatusOr<TabularDataset> train = LoadDataset(flags.train);
  if (!train.ok()) return Report(train.status(), kExitFailed);
  absl::StatusOr<TabularDataset> test = LoadDataset(flags.test);
  if (!test.ok()) return Report(test.status(), kExitFailed);
  absl::StatusOr<TrainedModel> model = Fit(spec, *train);
  if (!model.ok()) return Report(model.status(), kExitFailed);
  if (!model->info().converged) {
    std::cerr << "warning: training did not converge\n";
  }
  if (flags.model_out) {
    if (absl::Status s = SaveModel(*model, *flags.model_out); !s.ok()) {
      return Report(s, kExitFailed);
    }
  }
  absl::StatusOr<std::vector<double>> scores = model->Predict(*test);
  if (!scores.ok()) return Report(scores.status(), kExitFailed);

  CellOutcome cell;
  cell.scenario = "cli";
  for (double target : flags.target_fprs) {
    absl::StatusOr<FairnessReport> report =
        EvaluateScores(*scores, test->labels(), test->groups(), target);
    if (!report.ok()) return Report(report.status(), kExitFailed);
    RunRecord r;
    r.scenario = "cli";
    r.algorithm = spec.algorithm;
    r.spec_id = spec.id;
    r.hyperparameters = FormatHyperparameters(spec.params);
    r.aware = spec.aware;
    r.converged = model->info().converged;
    r.report = *report;
    cell.records.push_back(std::move(r));
  }
  const std::string csv = FormatResultsCsv({cell});
  if (flags.output) {
    if (absl::Status s = WriteText(*flags.output, csv); !s.ok()) {
      return Report(s, kExitFailed);
    }
  }
  std::cout << csv;
  return kExitOk;
}

int RunRun(const std::optional<std::string>& config,
           const std::optional<std::string>& output,
           const std::optional<std::uint64_t>& seed) {
  if (!config) {
    return Report(absl::InvalidArgumentError("run requires --config"),
                  kExitConfig);
  }
  absl::StatusOr<ExperimentConfig> cfg = LoadExperimentConfig(*config);
  if (!cfg.ok()) return Report(cfg.status(), kExitConfig);
  if (output) cfg->output_dir = *output;
  if (seed) cfg->master_seed = *seed;
  absl::StatusOr<RunSummary> summary = RunExperiment(*cfg);
  if (!summary.ok()) return Report(summary.status(), kExitConfig);
  std::cout << FormatRunSummary(*summary);
  return summary->exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biasforge: bias-injection sandbox and fairness audit"};
  app.require_subcommand(1);

  BaseFlags gen_base;
  std::string gen_output = "base.csv";
  CLI::App* gen = app.add_subcommand("gen", "write a base dataset to CSV");
  gen_base.Register(gen);
  gen->add_option("--output", gen_output, "CSV path");

  BaseFlags inject_base;
  InjectFlags inject_flags;
  CLI::App* inject =
      app.add_subcommand("inject", "inject one scenario with one seed");
  inject_base.Register(inject);
  inject->add_option("--kind", inject_flags.kind, "scenario kind, e.g. H2_1");
  inject->add_option("--s-a", inject_flags.s_a, "target P[Z=A]");
  inject->add_option("--c", inject_flags.c, "prevalence multiplier");
  inject->add_option("--seed", inject_flags.seed, "injection seed");
  inject->add_option("--output", inject_flags.output, "output directory");

  std::string audit_input;
  double audit_alpha = kDefaultAlpha;
  std::optional<std::string> audit_output;
  CLI::App* audit = app.add_subcommand("audit", "audit a dataset CSV");
  audit->add_option("--input", audit_input, "dataset CSV")->required();
  audit->add_option("--alpha", audit_alpha, "significance level");
  audit->add_option("--output", audit_output, "report path");

  TrainEvalFlags te;
  CLI::App* train_eval =
      app.add_subcommand("train-eval", "fit one spec and evaluate it");
  train_eval->add_option("--train", te.train, "training CSV")->required();
  train_eval->add_option("--test", te.test, "test CSV")->required();
  train_eval->add_option("--algorithm", te.algorithm,
                         "LOGREG, TREE, FOREST or GBT");
  train_eval->add_option("--params", te.params,
                         "hyperparameters, e.g. \"max_depth=4;min_leaf=20\"");
  train_eval->add_flag("--aware", te.aware, "use the protected attribute");
  train_eval->add_option("--seed", te.seed, "training seed");
  train_eval->add_option("--target-fpr", te.target_fprs, "FPR ceilings");
  train_eval->add_option("--output", te.output, "results CSV path");
  train_eval->add_option("--model-out", te.model_out, ".model path");

  std::optional<std::string> run_config;
  std::optional<std::string> run_output;
  std::optional<std::uint64_t> run_seed;
  CLI::App* run = app.add_subcommand("run", "run a full experiment");
  run->add_option("--config", run_config, "experiment config (YAML)");
  run->add_option("--output", run_output, "output directory override");
  run->add_option("--seed", run_seed, "master seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*gen) return RunGen(gen_base, gen_output);
  if (*inject) return RunInject(inject_base, inject_flags);
  if (*audit) return RunAudit(audit_input, audit_alpha, audit_output);
  if (*train_eval) return RunTrainEval(te);
  if (*run) return RunRun(run_config, run_output, run_seed);
  return kExitConfig;
}

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

#include "biasforge/experiment.h"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>
#include <utility>

#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "biasforge/model_io.h"
#include "biasforge/rng.h"
#include "biasforge/text_format.h"
#include "str_util.h"

namespace biasforge {
namespace {

namespace fs = std::filesystem;

std::string Flag(const std::optional<bool>& v) {
  if (!v) return "NA";
  return *v ? "1" : "0";
}

std::string Opt(const std::optional<double>& v) { return FormatOptional(v); }

// Writes via a temporary file and rename, so readers never observe a
// partially written file.
absl::Status WriteFileAtomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = fs::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::PermissionDeniedError(
          StrCat("cannot write ", tmp.string()));
    }
    out << data;
    out.close();
    if (!out) return absl::DataLossError(StrCat("write failed: ", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    return absl::DataLossError(
        StrCat("rename failed: ", path.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

void AppendConfusion(std::string* out, const ConfusionCounts& c) {
  StrAppend(out, ",", c.tp, ",", c.fp, ",", c.tn, ",", c.fn);
}

void AppendGroup(std::string* out, const GroupConfusion& g) {
  StrAppend(out, ",", g.total());
  AppendConfusion(out, g);
  StrAppend(out, ",", Opt(g.prevalence()), ",", Opt(g.fpr()), ",",
            Opt(g.fnr()), ",", Opt(g.ppv()));
}

void AppendSummary(std::string* out, const Summary& s) {
  StrAppend(out, ",", Opt(s.median), ",", Opt(s.min), ",", Opt(s.max));
}

absl::Status AnnotateCell(const absl::Status& s, std::string_view what) {
  return absl::Status(s.code(), StrCat(what, ": ", s.message()));
}

}  // namespace

std::uint64_t InjectionSeed(std::uint64_t master_seed,
                            std::size_t scenario_index, int replicate) {
  return DeriveSeed(master_seed,
                    {HashTag("inject"), static_cast<std::uint64_t>(scenario_index),
                     static_cast<std::uint64_t>(replicate)});
}

std::uint64_t FitSeed(const ModelSpec& spec, std::uint64_t injection_seed) {
  return DeriveSeed(spec.seed, {injection_seed});
}

absl::StatusOr<SpecTable> SampleSpecTable(const ExperimentConfig& cfg) {
  SpecTable table;
  const std::uint64_t seed =
      DeriveSeed(cfg.master_seed, {HashTag("hyperparams")});
  for (Algorithm a : cfg.algorithms) {
    absl::StatusOr<std::vector<ModelSpec>> specs =
        SampleHyperparams(a, cfg.configs_per_algorithm, seed);
    if (!specs.ok()) return specs.status();
    table[a] = *std::move(specs);
  }
  return table;
}

absl::StatusOr<BaseSplit> PrepareBase(const ExperimentConfig& cfg) {
  absl::StatusOr<TabularDataset> base = GenerateBaseDataset(cfg.base);
  if (!base.ok()) return base.status();
  absl::StatusOr<std::pair<TabularDataset, TabularDataset>> split =
      TemporalSplit(*base, cfg.train_fraction);
  if (!split.ok()) return split.status();
  return BaseSplit{std::move(split->first), std::move(split->second)};
}

CellOutcome RunCell(const ExperimentConfig& cfg, const BaseSplit& base,
                    const SpecTable& specs, std::size_t scenario_index,
                    int replicate) {
  CellOutcome out;
  out.scenario_index = scenario_index;
  out.replicate = replicate;
  out.injection_seed = InjectionSeed(cfg.master_seed, scenario_index, replicate);
  BiasScenario scenario = cfg.scenarios[scenario_index];
  scenario.seed = out.injection_seed;
  out.scenario = scenario.DisplayName();

  absl::StatusOr<InjectionResult> inj =
      ApplyScenario(base.train, base.test, scenario);
  if (!inj.ok()) {
    out.status = AnnotateCell(inj.status(), "inject");
    return out;
  }
  out.manifest = inj->manifest;
  for (auto [ds, audit] : {std::pair{&inj->train, &out.train_audit},
                           std::pair{&inj->test, &out.test_audit}}) {
    absl::StatusOr<std::vector<AuditResult>> a =
        AuditDataset(*ds, cfg.audit_alpha);
    if (!a.ok()) {
      out.status = AnnotateCell(a.status(), "audit");
      return out;
    }
    *audit = *std::move(a);
  }

  const TabularDataset& test = inj->test;
  for (Algorithm algorithm : cfg.algorithms) {
    for (const ModelSpec& base_spec : specs.at(algorithm)) {
      for (bool aware : cfg.awareness_modes) {
        ModelSpec spec = base_spec;
        spec.aware = aware;
        spec.seed = FitSeed(base_spec, out.injection_seed);
        const std::string tag =
            StrCat(base_spec.id, aware ? " aware" : " unaware");
        absl::StatusOr<TrainedModel> model = Fit(spec, inj->train);
        if (!model.ok()) {
          if (out.status.ok()) out.status = AnnotateCell(model.status(), tag);
          continue;
        }
        absl::StatusOr<std::vector<double>> scores = model->Predict(test);
        if (!scores.ok()) {
          if (out.status.ok()) out.status = AnnotateCell(scores.status(), tag);
          continue;
        }
        for (double target : cfg.target_fprs) {
          absl::StatusOr<FairnessReport> report =
              EvaluateScores(*scores, test.labels(), test.groups(), target);
          if (!report.ok()) {
            if (out.status.ok()) {
              out.status = AnnotateCell(report.status(), tag);
            }
            continue;
          }
          RunRecord r;
          r.scenario_index = scenario_index;
          r.scenario = out.scenario;
          r.replicate = replicate;
          r.injection_seed = out.injection_seed;
          r.algorithm = algorithm;
          r.spec_id = base_spec.id;
          r.hyperparameters = FormatHyperparameters(base_spec.params);
          r.aware = aware;
          r.converged = model->info().converged;
          r.report = *std::move(report);
          out.records.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

std::vector<AggregateResult> AggregateCells(
    const ExperimentConfig& cfg, const std::vector<CellOutcome>& cells) {
  std::vector<AggregateResult> out;
  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
    for (Algorithm algorithm : cfg.algorithms) {
      for (bool aware : cfg.awareness_modes) {
        for (double target : cfg.target_fprs) {
          std::vector<EvaluatedRun> runs;
          for (const CellOutcome& cell : cells) {
            if (cell.scenario_index != s) continue;
            for (const RunRecord& r : cell.records) {
              if (r.algorithm == algorithm && r.aware == aware &&
                  r.report.target_fpr == target) {
                runs.push_back({static_cast<std::uint64_t>(r.replicate),
                                r.spec_id, r.report});
              }
            }
          }
          if (runs.empty()) continue;
          absl::StatusOr<AggregateResult> agg =
              AggregateErrorBars(SelectTopPerSeed(std::move(runs)));
          if (!agg.ok()) continue;
          agg->scenario = cfg.scenarios[s].DisplayName();
          agg->algorithm = std::string(AlgorithmName(algorithm));
          agg->aware = aware;
          agg->target_fpr = target;
          out.push_back(*std::move(agg));
        }
      }
    }
  }
  return out;
}

std::string FormatResultsCsv(const std::vector<CellOutcome>& cells) {
  std::string out =
      "scenario,replicate,injection_seed,algorithm,spec_id,hyperparameters,"
      "aware,target_fpr,threshold,tp,fp,tn,fn,tpr,fpr,auc,"
      "n_a,tp_a,fp_a,tn_a,fn_a,prevalence_a,fpr_a,fnr_a,ppv_a,"
      "n_b,tp_b,fp_b,tn_b,fn_b,prevalence_b,fpr_b,fnr_b,ppv_b,"
      "log2_fpr_ratio,log2_fnr_ratio,log2_ppv_ratio,eighty_rule_fpr,"
      "eighty_rule_fnr,prevalence_odds_factor,imprecision_odds_factor,"
      "recall_factor,decomposition_residual,auc_a,auc_b,converged,"
      "degenerate\n";
  for (const CellOutcome& cell : cells) {
    for (const RunRecord& r : cell.records) {
      const FairnessReport& rep = r.report;
      StrAppend(&out, r.scenario, ",", r.replicate, ",", r.injection_seed, ",",
                AlgorithmName(r.algorithm), ",", r.spec_id, ",",
                r.hyperparameters, ",", r.aware ? "aware" : "unaware", ",",
                FormatDouble(rep.target_fpr), ",", FormatDouble(rep.threshold));
      AppendConfusion(&out, rep.global);
      StrAppend(&out, ",", Opt(rep.global.tpr()), ",", Opt(rep.global.fpr()),
                ",", Opt(rep.auc));
      AppendGroup(&out, rep.a);
      AppendGroup(&out, rep.b);
      const FairnessRatios& q = rep.ratios;
      StrAppend(&out, ",", Opt(q.log2_fpr_ratio), ",", Opt(q.log2_fnr_ratio),
                ",", Opt(q.log2_ppv_ratio), ",", Flag(q.eighty_rule_fpr), ",",
                Flag(q.eighty_rule_fnr));
      const std::optional<FprDecomposition>& d = rep.decomposition;
      StrAppend(&out, ",",
                Opt(d ? std::optional(d->prevalence_odds) : std::nullopt), ",",
                Opt(d ? std::optional(d->imprecision_odds) : std::nullopt), ",",
                Opt(d ? std::optional(d->recall) : std::nullopt), ",",
                Opt(d ? std::optional(d->residual) : std::nullopt));
      StrAppend(&out, ",", Opt(rep.auc_a), ",", Opt(rep.auc_b), ",",
                r.converged ? "1" : "0", ",",
                q.degenerate.empty() ? "" : absl::StrJoin(q.degenerate, ";"),
                "\n");
    }
  }
  return out;
}

std::string FormatAggregateCsv(const std::vector<AggregateResult>& aggregates) {
  std::string out =
      "scenario,algorithm,aware,target_fpr,n_seeds,"
      "tpr_median,tpr_min,tpr_max,"
      "log2_fpr_ratio_median,log2_fpr_ratio_min,log2_fpr_ratio_max,"
      "log2_fpr_ratio_undefined,"
      "log2_fnr_ratio_median,log2_fnr_ratio_min,log2_fnr_ratio_max,"
      "log2_fnr_ratio_undefined,"
      "log2_ppv_ratio_median,log2_ppv_ratio_min,log2_ppv_ratio_max,"
      "log2_ppv_ratio_undefined,auc_a_median,auc_b_median,undefined,"
      "top_specs\n";
  for (const AggregateResult& a : aggregates) {
    StrAppend(&out, a.scenario, ",", a.algorithm, ",",
              a.aware ? "aware" : "unaware", ",", FormatDouble(a.target_fpr),
              ",", a.top_runs.size());
    AppendSummary(&out, a.tpr);
    AppendSummary(&out, a.log2_fpr_ratio);
    StrAppend(&out, ",", a.log2_fpr_ratio.n_undefined);
    AppendSummary(&out, a.log2_fnr_ratio);
    StrAppend(&out, ",", a.log2_fnr_ratio.n_undefined);
    AppendSummary(&out, a.log2_ppv_ratio);
    StrAppend(&out, ",", a.log2_ppv_ratio.n_undefined);
    std::vector<std::string> top;
    for (const EvaluatedRun& r : a.top_runs) top.push_back(r.spec_id);
    StrAppend(&out, ",", Opt(a.auc_a.median), ",", Opt(a.auc_b.median), ",",
              a.undefined ? "1" : "0", ",", absl::StrJoin(top, ";"), "\n");
  }
  return out;
}

std::string FormatAuditCsv(const std::vector<CellOutcome>& cells) {
  std::string out =
      "scenario,replicate,injection_seed,partition,condition,statistic,"
      "p_value,alpha,detected,degenerate,effect\n";
  for (const CellOutcome& cell : cells) {
    for (auto [partition, audit] :
         {std::pair{"train", &cell.train_audit},
          std::pair{"test", &cell.test_audit}}) {
      for (const AuditResult& r : *audit) {
        StrAppend(&out, cell.scenario, ",", cell.replicate, ",",
                  cell.injection_seed, ",", partition, ",",
                  BiasConditionName(r.condition), ",",
                  FormatDouble(r.statistic), ",", FormatDouble(r.p_value), ",",
                  FormatDouble(r.alpha), ",", r.detected ? "1" : "0", ",",
                  r.degenerate ? "1" : "0", ",", Opt(r.effect), "\n");
      }
    }
  }
  return out;
}

std::string FormatRunSummary(const RunSummary& summary) {
  std::string out = StrCat("cells: ", summary.cells.size(),
                           "  failed: ", summary.failed_cells, "\n");
  for (const CellOutcome& cell : summary.cells) {
    if (!cell.status.ok()) {
      StrAppend(&out, "FAILED ", cell.scenario, " replicate ", cell.replicate,
                ": ", cell.status.message(), "\n");
    }
  }
  out +=
      "scenario,algorithm,mode,target_fpr,median_tpr,median_log2_fpr_ratio,"
      "median_log2_fnr_ratio,median_log2_ppv_ratio\n";
  for (const AggregateResult& a : summary.aggregates) {
    StrAppend(&out, a.scenario, ",", a.algorithm, ",",
              a.aware ? "aware" : "unaware", ",", FormatDouble(a.target_fpr),
              ",", Opt(a.tpr.median), ",", Opt(a.log2_fpr_ratio.median), ",",
              Opt(a.log2_fnr_ratio.median), ",", Opt(a.log2_ppv_ratio.median),
              "\n");
  }
  return out;
}

absl::StatusOr<std::vector<std::string>> EmitPlotData(
    const std::vector<AggregateResult>& aggregates,
    const std::string& output_dir) {
  if (aggregates.empty()) {
    return absl::InvalidArgumentError("no aggregates to plot");
  }
  std::vector<double> targets;
  for (const AggregateResult& a : aggregates) {
    if (std::find(targets.begin(), targets.end(), a.target_fpr) ==
        targets.end()) {
      targets.push_back(a.target_fpr);
    }
  }
  struct Metric {
    const char* name;
    Summary AggregateResult::*field;
  };
  const Metric metrics[] = {
      {"log2_fpr_ratio", &AggregateResult::log2_fpr_ratio},
      {"log2_fnr_ratio", &AggregateResult::log2_fnr_ratio},
      {"log2_ppv_ratio", &AggregateResult::log2_ppv_ratio},
  };
  std::vector<std::string> paths;
  for (const Metric& m : metrics) {
    for (double target : targets) {
      std::string out = StrCat("# metric: ", m.name, "\n# target_fpr: ",
                               FormatDouble(target), "\n");
      StrAppend(&out, "# band_low: ", absl::StrFormat("%.6f", -kEightyRuleBand),
                "\n# band_high: ", absl::StrFormat("%.6f", kEightyRuleBand),
                "\n");
      out +=
          "scenario,algorithm,aware,x_median,x_min,x_max,y_median,y_min,"
          "y_max\n";
      for (const AggregateResult& a : aggregates) {
        if (a.target_fpr != target) continue;
        const Summary& y = a.*(m.field);
        StrAppend(&out, a.scenario, ",", a.algorithm, ",",
                  a.aware ? "aware" : "unaware");
        AppendSummary(&out, a.tpr);
        AppendSummary(&out, y);
        out += "\n";
      }
      const fs::path path = fs::path(output_dir) /
                            StrCat("plot_", m.name, "_fpr",
                                   FormatDouble(target), ".csv");
      if (absl::Status s = WriteFileAtomic(path, out); !s.ok()) return s;
      paths.push_back(path.string());
    }
  }
  return paths;
}

int ResolveThreadCount(const ExperimentConfig& cfg) {
  int n = cfg.threads > 0
              ? cfg.threads
              : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("BIASFORGE_THREADS")) {
    std::optional<std::int64_t> cap = ParseInt(env);
    if (cap && *cap > 0) n = std::min<std::int64_t>(n, *cap);
  }
  return std::max(1, n);
}

absl::StatusOr<RunSummary> RunExperiment(const ExperimentConfig& cfg) {
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  const fs::path root(cfg.output_dir);
  std::error_code ec;
  for (const fs::path& dir : {root, root / "manifests", root / "audits"}) {
    fs::create_directories(dir, ec);
    if (ec) {
      return absl::PermissionDeniedError(
          StrCat("cannot create ", dir.string(), ": ", ec.message()));
    }
  }
  if (absl::Status s =
          WriteFileAtomic(root / "config.yaml", FormatExperimentConfig(cfg));
      !s.ok()) {
    return s;
  }
  absl::StatusOr<BaseSplit> base = PrepareBase(cfg);
  if (!base.ok()) return base.status();
  absl::StatusOr<SpecTable> specs = SampleSpecTable(cfg);
  if (!specs.ok()) return specs.status();

  std::vector<std::pair<std::size_t, int>> tasks;
  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
    for (int r = 0; r < cfg.replicates; ++r) tasks.emplace_back(s, r);
  }
  std::vector<std::optional<CellOutcome>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::size_t> finished;

  const int n_workers =
      std::min<int>(ResolveThreadCount(cfg), static_cast<int>(tasks.size()));
  std::vector<std::thread> workers;
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        CellOutcome cell =
            RunCell(cfg, *base, *specs, tasks[i].first, tasks[i].second);
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(cell);
        finished.push_back(i);
        cv.notify_one();
      }
    });
  }

  // Single collector: per-cell files are written here as cells complete.
  absl::Status write_status;
  for (std::size_t done = 0; done < tasks.size(); ++done) {
    std::size_t i;
    {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return !finished.empty(); });
      i = finished.front();
      finished.pop_front();
    }
    const CellOutcome& cell = *slots[i];
    if (!cell.manifest.has_value()) continue;
    BiasScenario sc = cfg.scenarios[cell.scenario_index];
    sc.seed = cell.injection_seed;
    const std::string stem =
        StrCat(sc.DisplayName(), "_", cell.injection_seed);
    absl::Status s = WriteFileAtomic(root / "manifests" / ManifestFileName(sc),
                                     FormatManifest(*cell.manifest));
    if (s.ok() && !cell.train_audit.empty()) {
      s = WriteFileAtomic(root / "audits" / StrCat(stem, "_train.audit"),
                          FormatAuditReport(cell.train_audit));
    }
    if (s.ok() && !cell.test_audit.empty()) {
      s = WriteFileAtomic(root / "audits" / StrCat(stem, "_test.audit"),
                          FormatAuditReport(cell.test_audit));
    }
    if (!s.ok() && write_status.ok()) write_status = s;
  }
  for (std::thread& t : workers) t.join();
  if (!write_status.ok()) return write_status;

  RunSummary summary;
  summary.cells.reserve(slots.size());
  for (std::optional<CellOutcome>& slot : slots) {
    if (!slot->status.ok()) ++summary.failed_cells;
    summary.cells.push_back(*std::move(slot));
  }
  summary.aggregates = AggregateCells(cfg, summary.cells);

  for (auto [name, content] :
       {std::pair{"results.csv", FormatResultsCsv(summary.cells)},
        std::pair{"aggregate.csv", FormatAggregateCsv(summary.aggregates)},
        std::pair{"audit_results.csv", FormatAuditCsv(summary.cells)},
        std::pair{"summary.txt", FormatRunSummary(summary)}}) {
    if (absl::Status s = WriteFileAtomic(root / name, content); !s.ok()) {
      return s;
    }
  }
  if (!summary.aggregates.empty()) {
    absl::StatusOr<std::vector<std::string>> plots =
        EmitPlotData(summary.aggregates, cfg.output_dir);
    if (!plots.ok()) return plots.status();
  }
  return summary;
}

}  // namespace biasforge

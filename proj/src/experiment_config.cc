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

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "biasforge/experiment.h"
#include "biasforge/text_format.h"
#include "str_util.h"
#include "yaml-cpp/yaml.h"

namespace biasforge {
namespace {

absl::Status ConfigError(std::string_view message) {
  return absl::InvalidArgumentError(StrCat("config: ", message));
}

absl::Status CheckKeys(const YAML::Node& node, std::string_view where,
                       const std::set<std::string>& allowed) {
  if (!node.IsMap()) return ConfigError(StrCat(where, " must be a mapping"));
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (allowed.count(key) == 0) {
      return ConfigError(StrCat("unknown key '", key, "' in ", where));
    }
  }
  return absl::OkStatus();
}

template <typename T>
absl::Status Read(const YAML::Node& node, const char* key, T& out) {
  const YAML::Node v = node[key];
  if (!v) return absl::OkStatus();
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    return ConfigError(StrCat("bad value for '", key, "'"));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::array<double, 2>> ReadPair(const YAML::Node& node,
                                               std::string_view what) {
  if (!node.IsSequence() || node.size() != 2) {
    return ConfigError(StrCat(what, " must be a list of 2 numbers"));
  }
  try {
    return std::array<double, 2>{node[0].as<double>(), node[1].as<double>()};
  } catch (const YAML::Exception&) {
    return ConfigError(StrCat(what, " must be numeric"));
  }
}

absl::StatusOr<SeparabilityScheme> ReadScheme(const YAML::Node& node) {
  if (node.IsScalar()) {
    if (node.as<std::string>() == "default") {
      return SeparabilityScheme::Default();
    }
    return ConfigError("scheme must be 'default' or a mapping");
  }
  if (absl::Status s = CheckKeys(node, "scheme", {"A0", "A1", "B0", "B1"});
      !s.ok()) {
    return s;
  }
  SeparabilityScheme scheme = SeparabilityScheme::Default();
  for (const char* cell : {"A0", "A1", "B0", "B1"}) {
    const YAML::Node c = node[cell];
    if (!c) continue;
    if (absl::Status s = CheckKeys(c, cell, {"mean", "cov"}); !s.ok()) return s;
    const Group g = cell[0] == 'A' ? Group::kA : Group::kB;
    BivariateNormal& bn = scheme.at(cell[1] - '0', g);
    if (c["mean"]) {
      absl::StatusOr<std::array<double, 2>> mean =
          ReadPair(c["mean"], StrCat(cell, ".mean"));
      if (!mean.ok()) return mean.status();
      bn.mean = *mean;
    }
    if (c["cov"]) {
      const YAML::Node cov = c["cov"];
      if (!cov.IsSequence() || cov.size() != 3) {
        return ConfigError(StrCat(cell, ".cov must be [xx, xy, yy]"));
      }
      try {
        bn.cov = {cov[0].as<double>(), cov[1].as<double>(),
                  cov[2].as<double>()};
      } catch (const YAML::Exception&) {
        return ConfigError(StrCat(cell, ".cov must be numeric"));
      }
    }
  }
  return scheme;
}

absl::StatusOr<BiasScenario> ReadScenario(const YAML::Node& node,
                                          std::size_t index) {
  const std::string where = StrCat("scenarios[", index, "]");
  if (absl::Status s =
          CheckKeys(node, where, {"kind", "name", "s_a", "c", "scheme"});
      !s.ok()) {
    return s;
  }
  if (!node["kind"]) return ConfigError(StrCat(where, " needs a kind"));
  absl::StatusOr<ScenarioKind> kind =
      ParseScenarioKind(node["kind"].as<std::string>());
  if (!kind.ok()) return ConfigError(std::string(kind.status().message()));
  BiasScenario sc;
  sc.kind = *kind;
  if (absl::Status s = Read(node, "name", sc.name); !s.ok()) return s;
  if (absl::Status s = Read(node, "s_a", sc.s_a); !s.ok()) return s;
  if (absl::Status s = Read(node, "c", sc.c); !s.ok()) return s;
  if (node["scheme"]) {
    absl::StatusOr<SeparabilityScheme> scheme = ReadScheme(node["scheme"]);
    if (!scheme.ok()) return scheme.status();
    sc.scheme = *scheme;
  } else if (sc.kind == ScenarioKind::kH3) {
    sc.scheme = SeparabilityScheme::Default();
  }
  return sc;
}

void EmitNumber(YAML::Emitter& out, const char* key, double v) {
  out << YAML::Key << key << YAML::Value << FormatDouble(v);
}

}  // namespace

absl::Status ExperimentConfig::Validate() const {
  if (absl::Status s = base.Validate(); !s.ok()) return s;
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    return ConfigError("train_fraction must be in (0,1)");
  }
  if (scenarios.empty()) return ConfigError("at least one scenario required");
  std::set<std::string> names;
  for (const BiasScenario& sc : scenarios) {
    if (absl::Status s = sc.Validate(); !s.ok()) {
      return ConfigError(StrCat(sc.DisplayName(), ": ", s.message()));
    }
    if (!names.insert(sc.DisplayName()).second) {
      return ConfigError(
          StrCat("duplicate scenario name '", sc.DisplayName(), "'"));
    }
  }
  if (replicates < 1) return ConfigError("replicates must be >= 1");
  if (algorithms.empty()) return ConfigError("at least one algorithm required");
  if (std::set<Algorithm>(algorithms.begin(), algorithms.end()).size() !=
      algorithms.size()) {
    return ConfigError("duplicate algorithm");
  }
  if (configs_per_algorithm < 1) {
    return ConfigError("configs_per_algorithm must be >= 1");
  }
  if (awareness_modes.empty() ||
      std::set<bool>(awareness_modes.begin(), awareness_modes.end()).size() !=
          awareness_modes.size()) {
    return ConfigError("awareness_modes must be a non-empty set");
  }
  if (target_fprs.empty()) return ConfigError("target_fprs must be non-empty");
  for (double t : target_fprs) {
    if (!(t > 0.0 && t < 1.0)) {
      return ConfigError(StrCat("target FPR ", t, " not in (0,1)"));
    }
  }
  if (!(audit_alpha > 0.0 && audit_alpha < 1.0)) {
    return ConfigError("audit_alpha must be in (0,1)");
  }
  if (output_dir.empty()) return ConfigError("output_dir must be set");
  if (threads < 0) return ConfigError("threads must be >= 0");
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    return ConfigError(StrCat("YAML parse error: ", e.what()));
  }
  if (!root || root.IsNull()) return ConfigError("empty config");
  if (absl::Status s = CheckKeys(
          root, "config",
          {"base", "train_fraction", "scenarios", "replicates", "algorithms",
           "configs_per_algorithm", "awareness_modes", "target_fprs",
           "audit_alpha", "master_seed", "output_dir", "threads"});
      !s.ok()) {
    return s;
  }
  ExperimentConfig cfg;
  if (const YAML::Node b = root["base"]) {
    if (absl::Status s = CheckKeys(
            b, "base",
            {"n_rows", "base_prevalence", "n_informative", "n_noise",
             "class_separation", "drift_shift", "drift_fraction", "seed"});
        !s.ok()) {
      return s;
    }
    for (absl::Status s :
         {Read(b, "n_rows", cfg.base.n_rows),
          Read(b, "base_prevalence", cfg.base.base_prevalence),
          Read(b, "n_informative", cfg.base.n_informative),
          Read(b, "n_noise", cfg.base.n_noise),
          Read(b, "class_separation", cfg.base.class_separation),
          Read(b, "drift_shift", cfg.base.drift_shift),
          Read(b, "drift_fraction", cfg.base.drift_fraction),
          Read(b, "seed", cfg.base.seed)}) {
      if (!s.ok()) return s;
    }
  }
  for (absl::Status s :
       {Read(root, "train_fraction", cfg.train_fraction),
        Read(root, "replicates", cfg.replicates),
        Read(root, "configs_per_algorithm", cfg.configs_per_algorithm),
        Read(root, "audit_alpha", cfg.audit_alpha),
        Read(root, "master_seed", cfg.master_seed),
        Read(root, "output_dir", cfg.output_dir),
        Read(root, "threads", cfg.threads),
        Read(root, "target_fprs", cfg.target_fprs)}) {
    if (!s.ok()) return s;
  }
  if (const YAML::Node a = root["algorithms"]) {
    if (!a.IsSequence()) return ConfigError("algorithms must be a list");
    cfg.algorithms.clear();
    for (const YAML::Node& item : a) {
      absl::StatusOr<Algorithm> algo = ParseAlgorithm(item.as<std::string>());
      if (!algo.ok()) return ConfigError(std::string(algo.status().message()));
      cfg.algorithms.push_back(*algo);
    }
  }
  if (const YAML::Node m = root["awareness_modes"]) {
    if (!m.IsSequence()) return ConfigError("awareness_modes must be a list");
    cfg.awareness_modes.clear();
    for (const YAML::Node& item : m) {
      const std::string mode = item.as<std::string>();
      if (mode == "aware") {
        cfg.awareness_modes.push_back(true);
      } else if (mode == "unaware") {
        cfg.awareness_modes.push_back(false);
      } else {
        return ConfigError(StrCat("unknown awareness mode '", mode, "'"));
      }
    }
  }
  if (const YAML::Node s = root["scenarios"]) {
    if (!s.IsSequence()) return ConfigError("scenarios must be a list");
    for (std::size_t i = 0; i < s.size(); ++i) {
      absl::StatusOr<BiasScenario> sc = ReadScenario(s[i], i);
      if (!sc.ok()) return sc.status();
      cfg.scenarios.push_back(*sc);
    }
  }
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  return cfg;
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return ConfigError(StrCat("cannot read ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseExperimentConfig(buffer.str());
}

std::string FormatExperimentConfig(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "master_seed" << YAML::Value << cfg.master_seed;
  out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
  out << YAML::Key << "threads" << YAML::Value << cfg.threads;
  out << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_rows" << YAML::Value << cfg.base.n_rows;
  EmitNumber(out, "base_prevalence", cfg.base.base_prevalence);
  out << YAML::Key << "n_informative" << YAML::Value << cfg.base.n_informative;
  out << YAML::Key << "n_noise" << YAML::Value << cfg.base.n_noise;
  EmitNumber(out, "class_separation", cfg.base.class_separation);
  EmitNumber(out, "drift_shift", cfg.base.drift_shift);
  EmitNumber(out, "drift_fraction", cfg.base.drift_fraction);
  out << YAML::Key << "seed" << YAML::Value << cfg.base.seed;
  out << YAML::EndMap;
  EmitNumber(out, "train_fraction", cfg.train_fraction);
  out << YAML::Key << "replicates" << YAML::Value << cfg.replicates;
  out << YAML::Key << "configs_per_algorithm" << YAML::Value
      << cfg.configs_per_algorithm;
  out << YAML::Key << "algorithms" << YAML::Value << YAML::Flow
      << YAML::BeginSeq;
  for (Algorithm a : cfg.algorithms) out << std::string(AlgorithmName(a));
  out << YAML::EndSeq;
  out << YAML::Key << "awareness_modes" << YAML::Value << YAML::Flow
      << YAML::BeginSeq;
  for (bool aware : cfg.awareness_modes) out << (aware ? "aware" : "unaware");
  out << YAML::EndSeq;
  out << YAML::Key << "target_fprs" << YAML::Value << YAML::Flow
      << YAML::BeginSeq;
  for (double t : cfg.target_fprs) out << FormatDouble(t);
  out << YAML::EndSeq;
  EmitNumber(out, "audit_alpha", cfg.audit_alpha);
  out << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
  for (const BiasScenario& sc : cfg.scenarios) {
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value
        << std::string(ScenarioKindName(sc.kind));
    if (!sc.name.empty()) out << YAML::Key << "name" << YAML::Value << sc.name;
    EmitNumber(out, "s_a", sc.s_a);
    EmitNumber(out, "c", sc.c);
    if (sc.scheme) {
      out << YAML::Key << "scheme" << YAML::Value << YAML::BeginMap;
      for (const char* cell : {"A0", "A1", "B0", "B1"}) {
        const Group g = cell[0] == 'A' ? Group::kA : Group::kB;
        const BivariateNormal& bn = sc.scheme->at(cell[1] - '0', g);
        out << YAML::Key << cell << YAML::Value << YAML::Flow
            << YAML::BeginMap;
        out << YAML::Key << "mean" << YAML::Value << YAML::Flow
            << YAML::BeginSeq << FormatDouble(bn.mean[0])
            << FormatDouble(bn.mean[1]) << YAML::EndSeq;
        out << YAML::Key << "cov" << YAML::Value << YAML::Flow
            << YAML::BeginSeq << FormatDouble(bn.cov[0])
            << FormatDouble(bn.cov[1]) << FormatDouble(bn.cov[2])
            << YAML::EndSeq;
        out << YAML::EndMap;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace biasforge

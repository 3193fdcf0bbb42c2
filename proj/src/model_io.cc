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

#include "biasforge/model_io.h"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "str_util.h"
#include "absl/strings/str_join.h"
#include "biasforge/text_format.h"

namespace biasforge {
namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues ParamPairs(const Hyperparameters& params) {
  KeyValues kv;
  auto add = [&kv](std::string key, const std::string& value) {
    kv.emplace_back(std::move(key), value);
  };
  if (const auto* p = std::get_if<LogRegParams>(&params)) {
    add("learning_rate", FormatDouble(p->learning_rate));
    add("l2", FormatDouble(p->l2));
    add("epochs", StrCat(p->epochs));
  } else if (const auto* p = std::get_if<TreeParams>(&params)) {
    add("max_depth", StrCat(p->max_depth));
    add("min_leaf", StrCat(p->min_leaf));
  } else if (const auto* p = std::get_if<ForestParams>(&params)) {
    add("n_trees", StrCat(p->n_trees));
    add("max_depth", StrCat(p->max_depth));
    add("feature_fraction", FormatDouble(p->feature_fraction));
    add("bootstrap", p->bootstrap ? "1" : "0");
    add("min_leaf", StrCat(p->min_leaf));
  } else if (const auto* p = std::get_if<GbtParams>(&params)) {
    add("n_rounds", StrCat(p->n_rounds));
    add("learning_rate", FormatDouble(p->learning_rate));
    add("max_depth", StrCat(p->max_depth));
    add("subsample", FormatDouble(p->subsample));
    add("min_leaf", StrCat(p->min_leaf));
    add("l2", FormatDouble(p->l2));
  }
  return kv;
}

class ParamReader {
 public:
  explicit ParamReader(std::map<std::string, std::string> values)
      : values_(std::move(values)) {}

  void Int(const std::string& key, int& out) {
    auto it = values_.find(key);
    if (it == values_.end()) return;
    std::optional<std::int64_t> v = ParseInt(it->second);
    if (!v) Fail(key);
    else out = static_cast<int>(*v);
    values_.erase(it);
  }
  void Double(const std::string& key, double& out) {
    auto it = values_.find(key);
    if (it == values_.end()) return;
    std::optional<double> v = ParseDouble(it->second);
    if (!v) Fail(key);
    else out = *v;
    values_.erase(it);
  }
  void Bool(const std::string& key, bool& out) {
    auto it = values_.find(key);
    if (it == values_.end()) return;
    if (it->second == "1" || it->second == "true") out = true;
    else if (it->second == "0" || it->second == "false") out = false;
    else Fail(key);
    values_.erase(it);
  }
  absl::Status Finish() const {
    if (!status_.ok()) return status_;
    if (!values_.empty()) {
      return absl::InvalidArgumentError(
          StrCat("unknown hyperparameter: ", values_.begin()->first));
    }
    return absl::OkStatus();
  }

 private:
  void Fail(const std::string& key) {
    if (status_.ok()) {
      status_ = absl::InvalidArgumentError(
          StrCat("malformed hyperparameter: ", key));
    }
  }
  std::map<std::string, std::string> values_;
  absl::Status status_;
};

absl::StatusOr<Hyperparameters> ReadParams(
    Algorithm algorithm, std::map<std::string, std::string> values) {
  ParamReader r(std::move(values));
  Hyperparameters out;
  switch (algorithm) {
    case Algorithm::kLogReg: {
      LogRegParams p;
      r.Double("learning_rate", p.learning_rate);
      r.Double("l2", p.l2);
      r.Int("epochs", p.epochs);
      out = p;
      break;
    }
    case Algorithm::kTree: {
      TreeParams p;
      r.Int("max_depth", p.max_depth);
      r.Int("min_leaf", p.min_leaf);
      out = p;
      break;
    }
    case Algorithm::kForest: {
      ForestParams p;
      r.Int("n_trees", p.n_trees);
      r.Int("max_depth", p.max_depth);
      r.Double("feature_fraction", p.feature_fraction);
      r.Bool("bootstrap", p.bootstrap);
      r.Int("min_leaf", p.min_leaf);
      out = p;
      break;
    }
    case Algorithm::kGbt: {
      GbtParams p;
      r.Int("n_rounds", p.n_rounds);
      r.Double("learning_rate", p.learning_rate);
      r.Int("max_depth", p.max_depth);
      r.Double("subsample", p.subsample);
      r.Int("min_leaf", p.min_leaf);
      r.Double("l2", p.l2);
      out = p;
      break;
    }
  }
  if (absl::Status s = r.Finish(); !s.ok()) return s;
  return out;
}

std::string JoinDoubles(const std::vector<double>& values) {
  return absl::StrJoin(values, " ", [](std::string* out, double v) {
    out->append(FormatDouble(v));
  });
}

// Sequential reader over "key rest-of-line" records.
class LineReader {
 public:
  explicit LineReader(std::string_view text)
      : lines_(Split(text, '\n', /*skip_empty=*/true)) {}

  absl::StatusOr<std::vector<std::string_view>> Expect(std::string_view key) {
    if (pos_ >= lines_.size()) {
      return absl::InvalidArgumentError(
          StrCat("model truncated; expected '", key, "'"));
    }
    std::string_view line = StripSuffix(lines_[pos_], "\r");
    std::vector<std::string_view> fields =
        Split(line, ' ', /*skip_empty=*/true);
    if (fields.empty() || fields[0] != key) {
      return absl::InvalidArgumentError(StrCat(
          "model line ", pos_ + 1, ": expected '", key, "'"));
    }
    ++pos_;
    fields.erase(fields.begin());
    return fields;
  }

  bool Done() const { return pos_ >= lines_.size(); }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

absl::StatusOr<double> ToDouble(std::string_view s) {
  std::optional<double> v = ParseDouble(s);
  if (!v) return absl::InvalidArgumentError(StrCat("bad number: ", s));
  return *v;
}

absl::StatusOr<std::int64_t> ToInt(std::string_view s) {
  std::optional<std::int64_t> v = ParseInt(s);
  if (!v) return absl::InvalidArgumentError(StrCat("bad integer: ", s));
  return *v;
}

absl::StatusOr<std::vector<double>> ToDoubles(
    const std::vector<std::string_view>& fields, std::size_t expected) {
  if (fields.size() != expected) {
    return absl::InvalidArgumentError("array length mismatch");
  }
  std::vector<double> out;
  out.reserve(fields.size());
  for (std::string_view f : fields) {
    absl::StatusOr<double> v = ToDouble(f);
    if (!v.ok()) return v.status();
    out.push_back(*v);
  }
  return out;
}

// Reads "key <single value>".
absl::StatusOr<std::string_view> Single(LineReader& r, std::string_view key) {
  absl::StatusOr<std::vector<std::string_view>> f = r.Expect(key);
  if (!f.ok()) return f.status();
  if (f->size() != 1) {
    return absl::InvalidArgumentError(
        StrCat("'", key, "' takes exactly one value"));
  }
  return (*f)[0];
}

#define BF_ASSIGN_OR_RETURN(lhs, expr) \
  auto lhs##_or = (expr);              \
  if (!lhs##_or.ok()) return lhs##_or.status(); \
  auto lhs = *std::move(lhs##_or)

}  // namespace

std::string FormatHyperparameters(const Hyperparameters& params) {
  return absl::StrJoin(ParamPairs(params), ";", absl::PairFormatter("="));
}

absl::StatusOr<Hyperparameters> ParseHyperparameters(Algorithm algorithm,
                                                     std::string_view text) {
  std::map<std::string, std::string> values;
  for (std::string_view item : Split(text, ';', /*skip_empty=*/true)) {
    const auto kv = SplitOnce(item, '=');
    std::string key(StripWhitespace(kv.first));
    if (key.empty() || values.count(key) > 0) {
      return absl::InvalidArgumentError(
          StrCat("malformed hyperparameter list: ", text));
    }
    values[key] = std::string(StripWhitespace(kv.second));
  }
  return ReadParams(algorithm, std::move(values));
}

std::string SerializeModel(const TrainedModel& model) {
  std::ostringstream out;
  const ModelSpec& spec = model.spec();
  out << kModelMagic << " " << kModelFormatVersion << "\n";
  out << "id " << spec.id << "\n";
  out << "algorithm " << AlgorithmName(spec.algorithm) << "\n";
  out << "aware " << (spec.aware ? 1 : 0) << "\n";
  out << "seed " << spec.seed << "\n";
  const KeyValues params = ParamPairs(spec.params);
  out << "params " << params.size() << "\n";
  for (const auto& [k, v] : params) out << "param " << k << " " << v << "\n";
  out << "features " << model.features().size() << "\n";
  for (const std::string& f : model.features()) out << "feature " << f << "\n";
  const TrainingInfo& info = model.info();
  out << "iterations " << info.iterations << "\n";
  out << "converged " << (info.converged ? 1 : 0) << "\n";
  out << "loss_trace " << info.loss_trace.size();
  for (double v : info.loss_trace) out << " " << FormatDouble(v);
  out << "\n";
  const LinearParams& lin = model.linear();
  out << "linear " << lin.weights.size() << " " << FormatDouble(lin.bias)
      << "\n";
  out << "mean " << JoinDoubles(lin.mean) << "\n";
  out << "scale " << JoinDoubles(lin.scale) << "\n";
  out << "weights " << JoinDoubles(lin.weights) << "\n";
  out << "base_score " << FormatDouble(model.base_score()) << "\n";
  out << "trees " << model.trees().size() << "\n";
  for (const Tree& tree : model.trees()) {
    out << "tree " << tree.nodes.size() << "\n";
    for (const TreeNode& n : tree.nodes) {
      out << "node " << n.feature << " " << FormatDouble(n.threshold) << " "
          << n.left << " " << n.right << " " << FormatDouble(n.value) << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

absl::StatusOr<TrainedModel> ParseModel(std::string_view text) {
  LineReader r(text);
  BF_ASSIGN_OR_RETURN(version, Single(r, kModelMagic));
  if (version != StrCat(kModelFormatVersion)) {
    return absl::InvalidArgumentError(
        StrCat("unsupported model format version: ", version));
  }
  ModelSpec spec;
  BF_ASSIGN_OR_RETURN(id, Single(r, "id"));
  spec.id = std::string(id);
  BF_ASSIGN_OR_RETURN(algo_name, Single(r, "algorithm"));
  BF_ASSIGN_OR_RETURN(algorithm, ParseAlgorithm(algo_name));
  spec.algorithm = algorithm;
  BF_ASSIGN_OR_RETURN(aware, Single(r, "aware"));
  spec.aware = aware == "1";
  BF_ASSIGN_OR_RETURN(seed_text, Single(r, "seed"));
  std::optional<std::uint64_t> seed = ParseUint(seed_text);
  if (!seed) return absl::InvalidArgumentError("bad seed");
  spec.seed = *seed;

  BF_ASSIGN_OR_RETURN(n_params_text, Single(r, "params"));
  BF_ASSIGN_OR_RETURN(n_params, ToInt(n_params_text));
  std::map<std::string, std::string> values;
  for (std::int64_t i = 0; i < n_params; ++i) {
    BF_ASSIGN_OR_RETURN(kv, r.Expect("param"));
    if (kv.size() != 2) return absl::InvalidArgumentError("bad param line");
    values[std::string(kv[0])] = std::string(kv[1]);
  }
  BF_ASSIGN_OR_RETURN(params, ReadParams(spec.algorithm, std::move(values)));
  spec.params = params;
  if (absl::Status s = spec.Validate(); !s.ok()) return s;

  BF_ASSIGN_OR_RETURN(n_features_text, Single(r, "features"));
  BF_ASSIGN_OR_RETURN(n_features, ToInt(n_features_text));
  std::vector<std::string> features;
  for (std::int64_t i = 0; i < n_features; ++i) {
    BF_ASSIGN_OR_RETURN(name, Single(r, "feature"));
    features.emplace_back(name);
  }

  TrainingInfo info;
  BF_ASSIGN_OR_RETURN(iterations, Single(r, "iterations"));
  BF_ASSIGN_OR_RETURN(iterations_value, ToInt(iterations));
  info.iterations = static_cast<int>(iterations_value);
  BF_ASSIGN_OR_RETURN(converged, Single(r, "converged"));
  info.converged = converged == "1";
  BF_ASSIGN_OR_RETURN(trace, r.Expect("loss_trace"));
  if (trace.empty()) return absl::InvalidArgumentError("bad loss_trace");
  BF_ASSIGN_OR_RETURN(trace_len, ToInt(trace[0]));
  trace.erase(trace.begin());
  BF_ASSIGN_OR_RETURN(trace_values,
                      ToDoubles(trace, static_cast<std::size_t>(trace_len)));
  info.loss_trace = std::move(trace_values);

  LinearParams lin;
  BF_ASSIGN_OR_RETURN(linear, r.Expect("linear"));
  if (linear.size() != 2) return absl::InvalidArgumentError("bad linear line");
  BF_ASSIGN_OR_RETURN(n_weights, ToInt(linear[0]));
  BF_ASSIGN_OR_RETURN(bias, ToDouble(linear[1]));
  lin.bias = bias;
  const auto nw = static_cast<std::size_t>(n_weights);
  BF_ASSIGN_OR_RETURN(mean_fields, r.Expect("mean"));
  BF_ASSIGN_OR_RETURN(mean, ToDoubles(mean_fields, nw));
  BF_ASSIGN_OR_RETURN(scale_fields, r.Expect("scale"));
  BF_ASSIGN_OR_RETURN(scale, ToDoubles(scale_fields, nw));
  BF_ASSIGN_OR_RETURN(weight_fields, r.Expect("weights"));
  BF_ASSIGN_OR_RETURN(weights, ToDoubles(weight_fields, nw));
  lin.mean = std::move(mean);
  lin.scale = std::move(scale);
  lin.weights = std::move(weights);

  BF_ASSIGN_OR_RETURN(base_text, Single(r, "base_score"));
  BF_ASSIGN_OR_RETURN(base_score, ToDouble(base_text));
  BF_ASSIGN_OR_RETURN(n_trees_text, Single(r, "trees"));
  BF_ASSIGN_OR_RETURN(n_trees, ToInt(n_trees_text));
  std::vector<Tree> trees(static_cast<std::size_t>(n_trees));
  for (Tree& tree : trees) {
    BF_ASSIGN_OR_RETURN(n_nodes_text, Single(r, "tree"));
    BF_ASSIGN_OR_RETURN(n_nodes, ToInt(n_nodes_text));
    if (n_nodes < 1) return absl::InvalidArgumentError("empty tree");
    for (std::int64_t i = 0; i < n_nodes; ++i) {
      BF_ASSIGN_OR_RETURN(f, r.Expect("node"));
      if (f.size() != 5) return absl::InvalidArgumentError("bad node line");
      BF_ASSIGN_OR_RETURN(feature, ToInt(f[0]));
      BF_ASSIGN_OR_RETURN(threshold, ToDouble(f[1]));
      BF_ASSIGN_OR_RETURN(left, ToInt(f[2]));
      BF_ASSIGN_OR_RETURN(right, ToInt(f[3]));
      BF_ASSIGN_OR_RETURN(value, ToDouble(f[4]));
      TreeNode node;
      node.feature = static_cast<std::int32_t>(feature);
      node.threshold = threshold;
      node.left = static_cast<std::int32_t>(left);
      node.right = static_cast<std::int32_t>(right);
      node.value = value;
      const bool leaf = node.feature < 0;
      if (!leaf && (node.feature >= n_features || left <= i || right <= i ||
                    left >= n_nodes || right >= n_nodes)) {
        return absl::InvalidArgumentError("tree node out of range");
      }
      tree.nodes.push_back(node);
    }
  }
  BF_ASSIGN_OR_RETURN(end_fields, r.Expect("end"));
  (void)end_fields;
  if (!r.Done()) return absl::InvalidArgumentError("trailing data after end");
  return TrainedModel(std::move(spec), std::move(features), std::move(info),
                      std::move(lin), std::move(trees), base_score);
}

absl::Status SaveModel(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(StrCat("cannot write ", path));
  out << SerializeModel(model);
  out.close();
  if (!out) return absl::UnavailableError(StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<TrainedModel> LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(StrCat("cannot read ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseModel(buffer.str());
}

}  // namespace biasforge

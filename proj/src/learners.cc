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

#include "biasforge/learners.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>

#include "str_util.h"
#include "absl/strings/str_format.h"
#include "biasforge/binning.h"
#include "biasforge/rng.h"

namespace biasforge {
namespace {

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double LogUniform(SplitMix64& rng, double lo, double hi) {
  const double v = std::exp(rng.Uniform(std::log(lo), std::log(hi)));
  return std::clamp(v, lo, hi);
}

bool InRange(double v, double lo, double hi) { return v >= lo && v <= hi; }

absl::StatusOr<FeatureMatrix> GatherFeatures(
    const TabularDataset& ds, const std::vector<std::string>& features) {
  std::vector<std::span<const double>> columns;
  columns.reserve(features.size());
  for (const std::string& name : features) {
    absl::StatusOr<std::span<const double>> values = ds.Values(name);
    if (!values.ok()) {
      return absl::InvalidArgumentError(
          StrCat("missing feature column: ", name));
    }
    columns.push_back(*values);
  }
  FeatureMatrix m = MakeFeatureMatrix(columns);
  m.n_rows = ds.num_rows();
  m.values.resize(m.n_rows * m.n_features);
  return m;
}

struct FitOutput {
  TrainingInfo info;
  LinearParams linear;
  std::vector<Tree> trees;
  double base_score = 0.0;
};

FitOutput FitLogReg(const LogRegParams& p, std::uint64_t seed,
                    const FeatureMatrix& x, std::span<const double> y) {
  const std::size_t n = x.n_rows;
  const std::size_t nf = x.n_features;
  FitOutput out;
  LinearParams& lin = out.linear;
  lin.mean.assign(nf, 0.0);
  lin.scale.assign(nf, 1.0);
  lin.weights.assign(nf, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x.row(i)[f];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x.row(i)[f] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    lin.mean[f] = mean;
    lin.scale[f] = sd > 1e-12 ? sd : 1.0;
  }
  std::vector<double> z(n * nf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < nf; ++f) {
      z[i * nf + f] = (x.row(i)[f] - lin.mean[f]) / lin.scale[f];
    }
  }
  const double n_pos = std::accumulate(y.begin(), y.end(), 0.0);
  const double n_neg = static_cast<double>(n) - n_pos;
  const double w_pos = n_neg / n_pos;
  const double w_neg = 1.0;

  constexpr std::size_t kBatch = 256;
  SplitMix64 rng(DeriveSeed(seed, {HashTag("logreg_order")}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(nf);
  double prev_loss = 0.0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    Shuffle(std::span<std::size_t>(order), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += kBatch) {
      const std::size_t end = std::min(n, start + kBatch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_bias = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const double* row = &z[i * nf];
        double logit = lin.bias;
        for (std::size_t f = 0; f < nf; ++f) logit += lin.weights[f] * row[f];
        const double cw = y[i] > 0.5 ? w_pos : w_neg;
        const double ex = std::exp(-std::abs(logit));
        const double prob = logit >= 0.0 ? 1.0 / (1.0 + ex) : ex / (1.0 + ex);
        const double margin = y[i] > 0.5 ? logit : -logit;
        loss_sum += cw * (std::max(-margin, 0.0) + std::log1p(ex));
        const double e = cw * (prob - y[i]);
        for (std::size_t f = 0; f < nf; ++f) grad[f] += e * row[f];
        grad_bias += e;
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t f = 0; f < nf; ++f) {
        lin.weights[f] -=
            p.learning_rate * (grad[f] * inv + p.l2 * lin.weights[f]);
      }
      lin.bias -= p.learning_rate * grad_bias * inv;
    }
    double penalty = 0.0;
    for (double w : lin.weights) penalty += w * w;
    const double loss =
        loss_sum / static_cast<double>(n) + 0.5 * p.l2 * penalty;
    out.info.loss_trace.push_back(loss);
    if (epoch > 0) {
      out.info.converged = std::isfinite(loss) &&
                           std::abs(loss - prev_loss) <=
                               1e-3 * std::max(1.0, std::abs(prev_loss));
    }
    prev_loss = loss;
  }
  out.info.iterations = p.epochs;
  if (p.epochs == 1) out.info.converged = false;
  return out;
}

std::vector<Tree> FitForest(const ForestParams& p, std::uint64_t seed,
                            const BinnedMatrix& binned,
                            std::span<const double> y) {
  const std::size_t n = binned.n_rows;
  GrowOptions options;
  options.max_depth = p.max_depth;
  options.min_leaf = p.min_leaf;
  options.feature_fraction = p.feature_fraction;
  std::vector<Tree> trees;
  trees.reserve(p.n_trees);
  std::vector<double> weights(n);
  for (int t = 0; t < p.n_trees; ++t) {
    if (p.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      SplitMix64 boot(DeriveSeed(
          seed, {static_cast<std::uint64_t>(t), HashTag("bootstrap")}));
      for (std::size_t k = 0; k < n; ++k) weights[boot.UniformIndex(n)] += 1.0;
    } else {
      std::fill(weights.begin(), weights.end(), 1.0);
    }
    SplitMix64 rng(DeriveSeed(seed, {static_cast<std::uint64_t>(t)}));
    trees.push_back(GrowGiniTree(binned, y, weights, options, rng));
  }
  return trees;
}

FitOutput FitGbt(const GbtParams& p, std::uint64_t seed,
                 const BinnedMatrix& binned,
                 std::span<const double> y) {
  const std::size_t n = binned.n_rows;
  FitOutput out;
  const double n_pos = std::accumulate(y.begin(), y.end(), 0.0);
  const double n_neg = static_cast<double>(n) - n_pos;
  const double w_pos = n_neg / n_pos;
  out.base_score = std::log(w_pos * n_pos / n_neg);
  std::vector<double> f(n, out.base_score);
  // Only rows in the round's subsample get gradients; the rest stay zero
  // and are never read.
  std::vector<double> grad(n, 0.0);
  std::vector<double> hess(n, 0.0);

  GrowOptions options;
  options.max_depth = p.max_depth;
  options.min_leaf = p.min_leaf;
  options.l2 = p.l2;

  const std::size_t m = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(p.subsample * n)), 1, n);
  SplitMix64 rng(DeriveSeed(seed, {HashTag("gbt_subsample")}));
  std::vector<std::uint32_t> rows;
  rows.reserve(m);
  std::vector<std::int32_t> bins;
  for (int round = 0; round < p.n_rounds; ++round) {
    // Selection sampling: exactly m rows, uniformly, already in order.
    rows.clear();
    for (std::size_t i = 0; i < n && rows.size() < m; ++i) {
      const std::size_t need = m - rows.size();
      if (need == n - i || rng.UniformIndex(n - i) < need) {
        rows.push_back(static_cast<std::uint32_t>(i));
      }
    }
    // The trace holds the weighted log loss of the current ensemble on the
    // round's sample, before the round's tree is added.
    double loss = 0.0;
    double weight = 0.0;
    for (std::uint32_t i : rows) {
      const double w = y[i] > 0.5 ? w_pos : 1.0;
      const double z = f[i];
      const double e = std::exp(-std::abs(z));
      const double prob = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      const double margin = y[i] > 0.5 ? z : -z;
      loss += w * (std::max(-margin, 0.0) + std::log1p(e));
      weight += w;
      grad[i] = w * (prob - y[i]);
      hess[i] = std::max(w * prob * (1.0 - prob), 1e-16);
    }
    out.info.loss_trace.push_back(loss / weight);
    Tree tree = GrowNewtonTree(binned, grad, hess, rows, options);
    for (TreeNode& node : tree.nodes) {
      if (node.is_leaf()) node.value *= p.learning_rate;
    }
    // Route training rows on bin codes; "code <= bin" matches
    // "value <= threshold" because thresholds are bin cuts.
    bins.assign(tree.nodes.size(), 0);
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      const TreeNode& node = tree.nodes[k];
      if (node.is_leaf()) continue;
      const std::vector<double>& cuts = binned.cuts[node.feature];
      bins[k] = static_cast<std::int32_t>(
          std::lower_bound(cuts.begin(), cuts.end(), node.threshold) -
          cuts.begin());
    }
    const TreeNode* nodes = tree.nodes.data();
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* code = binned.row(i);
      std::int32_t k = 0;
      while (nodes[k].feature >= 0) {
        k = code[nodes[k].feature] <= bins[k] ? nodes[k].left : nodes[k].right;
      }
      f[i] += nodes[k].value;
    }
    out.trees.push_back(std::move(tree));
  }
  out.info.iterations = p.n_rounds;
  return out;
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kLogReg:
      return "LOGREG";
    case Algorithm::kTree:
      return "TREE";
    case Algorithm::kForest:
      return "FOREST";
    case Algorithm::kGbt:
      return "GBT";
  }
  return "UNKNOWN";
}

absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name) {
  std::string upper(name);
  for (char& ch : upper) {
    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  for (Algorithm a : kAllAlgorithms) {
    if (AlgorithmName(a) == upper) return a;
  }
  return absl::InvalidArgumentError(StrCat("unknown algorithm: ", name));
}

absl::Status ModelSpec::Validate() const {
  const bool match = std::visit(
      [this](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        switch (algorithm) {
          case Algorithm::kLogReg:
            return std::is_same_v<T, LogRegParams>;
          case Algorithm::kTree:
            return std::is_same_v<T, TreeParams>;
          case Algorithm::kForest:
            return std::is_same_v<T, ForestParams>;
          case Algorithm::kGbt:
            return std::is_same_v<T, GbtParams>;
        }
        return false;
      },
      params);
  if (!match) {
    return absl::InvalidArgumentError(StrCat(
        "hyperparameters do not match algorithm ", AlgorithmName(algorithm)));
  }
  auto bad = [](std::string_view what) {
    return absl::InvalidArgumentError(
        StrCat("invalid hyperparameter: ", what));
  };
  if (const auto* p = std::get_if<LogRegParams>(&params)) {
    if (!(p->learning_rate > 0.0) || !std::isfinite(p->learning_rate)) {
      return bad("learning_rate");
    }
    if (!(p->l2 >= 0.0) || !std::isfinite(p->l2)) return bad("l2");
    if (p->epochs < 1) return bad("epochs");
  } else if (const auto* p = std::get_if<TreeParams>(&params)) {
    if (p->max_depth < 0) return bad("max_depth");
    if (p->min_leaf < 1) return bad("min_leaf");
  } else if (const auto* p = std::get_if<ForestParams>(&params)) {
    if (p->n_trees < 1) return bad("n_trees");
    if (p->max_depth < 0) return bad("max_depth");
    if (!(p->feature_fraction > 0.0 && p->feature_fraction <= 1.0)) {
      return bad("feature_fraction");
    }
    if (p->min_leaf < 1) return bad("min_leaf");
  } else if (const auto* p = std::get_if<GbtParams>(&params)) {
    if (p->n_rounds < 1) return bad("n_rounds");
    if (!(p->learning_rate > 0.0) || !std::isfinite(p->learning_rate)) {
      return bad("learning_rate");
    }
    if (p->max_depth < 0) return bad("max_depth");
    if (!(p->subsample > 0.0 && p->subsample <= 1.0)) return bad("subsample");
    if (p->min_leaf < 1) return bad("min_leaf");
    if (!(p->l2 >= 0.0) || !std::isfinite(p->l2)) return bad("l2");
  }
  return absl::OkStatus();
}

bool ModelSpec::InGrid() const {
  if (!Validate().ok()) return false;
  if (const auto* p = std::get_if<LogRegParams>(&params)) {
    return InRange(p->learning_rate, 1e-3, 1e-1) && InRange(p->l2, 1e-6, 1e-1) &&
           InRange(p->epochs, 10, 100);
  }
  if (const auto* p = std::get_if<TreeParams>(&params)) {
    return InRange(p->max_depth, 2, 12) && InRange(p->min_leaf, 5, 200);
  }
  if (const auto* p = std::get_if<ForestParams>(&params)) {
    return InRange(p->n_trees, 25, 200) && InRange(p->max_depth, 4, 16) &&
           InRange(p->feature_fraction, 0.3, 1.0) && p->bootstrap;
  }
  const auto& p = std::get<GbtParams>(params);
  return InRange(p.n_rounds, 50, 300) && InRange(p.learning_rate, 0.02, 0.3) &&
         InRange(p.max_depth, 2, 6) && InRange(p.subsample, 0.5, 1.0);
}

absl::StatusOr<std::vector<ModelSpec>> SampleHyperparams(Algorithm algorithm,
                                                         int count,
                                                         std::uint64_t seed) {
  if (count < 1) return absl::InvalidArgumentError("count must be >= 1");
  const auto algo = static_cast<std::uint64_t>(algorithm);
  if (algo > static_cast<std::uint64_t>(Algorithm::kGbt)) {
    return absl::InvalidArgumentError("unknown algorithm");
  }
  SplitMix64 rng(DeriveSeed(seed, {HashTag("hyperparams"), algo}));
  std::vector<ModelSpec> specs;
  specs.reserve(count);
  for (int i = 0; i < count; ++i) {
    ModelSpec spec;
    spec.algorithm = algorithm;
    spec.id = absl::StrFormat("%s-%03d", std::string(AlgorithmName(algorithm)), i);
    spec.seed = DeriveSeed(seed, {algo, static_cast<std::uint64_t>(i)});
    switch (algorithm) {
      case Algorithm::kLogReg: {
        LogRegParams p;
        p.learning_rate = LogUniform(rng, 1e-3, 1e-1);
        p.l2 = LogUniform(rng, 1e-6, 1e-1);
        p.epochs = static_cast<int>(rng.UniformInt(10, 100));
        spec.params = p;
        break;
      }
      case Algorithm::kTree: {
        TreeParams p;
        p.max_depth = static_cast<int>(rng.UniformInt(2, 12));
        p.min_leaf = static_cast<int>(rng.UniformInt(5, 200));
        spec.params = p;
        break;
      }
      case Algorithm::kForest: {
        ForestParams p;
        p.n_trees = static_cast<int>(rng.UniformInt(25, 200));
        p.max_depth = static_cast<int>(rng.UniformInt(4, 16));
        p.feature_fraction = rng.Uniform(0.3, 1.0);
        spec.params = p;
        break;
      }
      case Algorithm::kGbt: {
        GbtParams p;
        p.n_rounds = static_cast<int>(rng.UniformInt(50, 300));
        p.learning_rate = LogUniform(rng, 0.02, 0.3);
        p.max_depth = static_cast<int>(rng.UniformInt(2, 6));
        p.subsample = rng.Uniform(0.5, 1.0);
        spec.params = p;
        break;
      }
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

TrainedModel::TrainedModel(ModelSpec spec, std::vector<std::string> features,
                           TrainingInfo info, LinearParams linear,
                           std::vector<Tree> trees, double base_score)
    : spec_(std::move(spec)),
      features_(std::move(features)),
      info_(std::move(info)),
      linear_(std::move(linear)),
      trees_(std::move(trees)),
      base_score_(base_score) {}

absl::StatusOr<std::vector<double>> TrainedModel::Predict(
    const TabularDataset& ds) const {
  absl::StatusOr<FeatureMatrix> x = GatherFeatures(ds, features_);
  if (!x.ok()) return x.status();
  std::vector<double> scores(x->n_rows);
  for (std::size_t i = 0; i < x->n_rows; ++i) {
    const double* row = x->row(i);
    double s = 0.0;
    switch (spec_.algorithm) {
      case Algorithm::kLogReg: {
        double logit = linear_.bias;
        for (std::size_t f = 0; f < features_.size(); ++f) {
          logit += linear_.weights[f] * (row[f] - linear_.mean[f]) /
                   linear_.scale[f];
        }
        s = Sigmoid(logit);
        break;
      }
      case Algorithm::kTree:
      case Algorithm::kForest: {
        double sum = 0.0;
        for (const Tree& t : trees_) sum += t.Predict(row);
        s = sum / static_cast<double>(trees_.size());
        break;
      }
      case Algorithm::kGbt: {
        double logit = base_score_;
        for (const Tree& t : trees_) logit += t.Predict(row);
        s = Sigmoid(logit);
        break;
      }
    }
    scores[i] = std::isfinite(s) ? std::clamp(s, 0.0, 1.0) : 0.5;
  }
  return scores;
}

absl::StatusOr<std::vector<std::string>> ModelFeatures(
    const ModelSpec& spec, const TabularDataset& ds) {
  std::vector<std::string> features = ds.FeatureNames();
  if (spec.aware) {
    if (!ds.has_protected()) {
      return absl::InvalidArgumentError(
          "aware model requires a protected attribute column");
    }
    features.push_back(*ds.protected_name());
  }
  return features;
}

absl::StatusOr<TrainedModel> Fit(const ModelSpec& spec,
                                 const TabularDataset& train) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  absl::StatusOr<std::vector<std::string>> features =
      ModelFeatures(spec, train);
  if (!features.ok()) return features.status();
  const std::span<const double> y = train.labels();
  const double n_pos = std::accumulate(y.begin(), y.end(), 0.0);
  if (n_pos < 1.0 || n_pos > static_cast<double>(y.size()) - 1.0) {
    return absl::InvalidArgumentError(
        "training data must contain both classes");
  }
  absl::StatusOr<FeatureMatrix> x = GatherFeatures(train, *features);
  if (!x.ok()) return x.status();

  FitOutput out;
  switch (spec.algorithm) {
    case Algorithm::kLogReg:
      out = FitLogReg(std::get<LogRegParams>(spec.params), spec.seed, *x, y);
      break;
    case Algorithm::kTree: {
      const auto& p = std::get<TreeParams>(spec.params);
      ForestParams single;
      single.n_trees = 1;
      single.max_depth = p.max_depth;
      single.min_leaf = p.min_leaf;
      single.feature_fraction = 1.0;
      single.bootstrap = false;
      out.trees = FitForest(single, spec.seed, BinFeatures(*x), y);
      out.info.iterations = 1;
      break;
    }
    case Algorithm::kForest: {
      const auto& p = std::get<ForestParams>(spec.params);
      out.trees = FitForest(p, spec.seed, BinFeatures(*x), y);
      out.info.iterations = p.n_trees;
      break;
    }
    case Algorithm::kGbt:
      out = FitGbt(std::get<GbtParams>(spec.params), spec.seed,
                   BinFeatures(*x), y);
      break;
  }
  return TrainedModel(spec, *std::move(features), std::move(out.info),
                      std::move(out.linear), std::move(out.trees),
                      out.base_score);
}

}  // namespace biasforge

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

#include "biasforge/hist_tree.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <utility>

namespace biasforge {

double Tree::Predict(const double* row) const {
  std::int32_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

namespace {

int DepthFrom(const std::vector<TreeNode>& nodes, std::int32_t i) {
  if (nodes[i].is_leaf()) return 0;
  return 1 + std::max(DepthFrom(nodes, nodes[i].left),
                      DepthFrom(nodes, nodes[i].right));
}

// Per-bin sufficient statistics. For Gini: (weight, positive weight,
// weight). For Newton: (hessian, gradient, row count).
struct BinStat {
  double w = 0.0;
  double s = 0.0;
  double n = 0.0;

  BinStat& operator+=(const BinStat& o) {
    w += o.w;
    s += o.s;
    n += o.n;
    return *this;
  }
};

BinStat operator-(const BinStat& a, const BinStat& b) {
  return {a.w - b.w, a.s - b.s, a.n - b.n};
}

struct GiniCriterion {
  std::span<const double> labels;
  std::span<const double> weights;
  GrowOptions options;

  BinStat Stat(std::uint32_t i) const {
    return {weights[i], weights[i] * labels[i], weights[i]};
  }
  // Negative weighted impurity, so larger is better.
  double Quality(const BinStat& s) const {
    return s.w > 0.0 ? -2.0 * s.s * (s.w - s.s) / s.w : 0.0;
  }
  double Leaf(const BinStat& s) const { return s.w > 0.0 ? s.s / s.w : 0.0; }
  bool ChildOk(const BinStat& s) const {
    return s.n >= options.min_leaf && s.w > 0.0;
  }
  bool MayDivide(const BinStat& s) const {
    return s.s > 0.0 && s.s < s.w && s.n >= 2.0 * options.min_leaf;
  }
};

struct NewtonCriterion {
  std::span<const double> grad;
  std::span<const double> hess;
  GrowOptions options;

  BinStat Stat(std::uint32_t i) const { return {hess[i], grad[i], 1.0}; }
  double Quality(const BinStat& s) const {
    return s.s * s.s / (s.w + options.l2);
  }
  double Leaf(const BinStat& s) const { return -s.s / (s.w + options.l2); }
  bool ChildOk(const BinStat& s) const {
    return s.n >= options.min_leaf && s.w >= options.min_child_hessian;
  }
  bool MayDivide(const BinStat& s) const {
    return s.n >= 2.0 * options.min_leaf;
  }
};

template <typename Criterion>
class Grower {
 public:
  Grower(const BinnedMatrix& x, Criterion criterion, SplitMix64* rng)
      : x_(x), c_(std::move(criterion)), rng_(rng) {
    offsets_.resize(x.n_features + 1, 0);
    for (std::size_t f = 0; f < x.n_features; ++f) {
      offsets_[f + 1] = offsets_[f] + x.num_bins(f);
    }
    const double frac = std::clamp(c_.options.feature_fraction, 0.0, 1.0);
    n_sampled_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(frac * x.n_features - 1e-9)));
    n_sampled_ = std::min(n_sampled_, x.n_features);
  }

  Tree Grow(std::vector<std::uint32_t> rows) {
    rows_ = std::move(rows);
    scratch_.resize(rows_.size());
    Tree tree;
    nodes_ = &tree.nodes;
    if (rows_.empty()) {
      tree.nodes.push_back(TreeNode{});
      return tree;
    }
    Hist root = Acquire();
    Build(0, rows_.size(), *root);
    BinStat total;
    for (std::uint32_t r : rows_) total += c_.Stat(r);
    Split(0, rows_.size(), std::move(root), total, 0);
    return tree;
  }

 private:
  using Hist = std::unique_ptr<std::vector<BinStat>>;

  Hist Acquire() {
    if (!pool_.empty()) {
      Hist h = std::move(pool_.back());
      pool_.pop_back();
      return h;
    }
    return std::make_unique<std::vector<BinStat>>(offsets_.back());
  }
  void Release(Hist h) { pool_.push_back(std::move(h)); }

  void Build(std::size_t begin, std::size_t end, std::vector<BinStat>& h) {
    std::fill(h.begin(), h.end(), BinStat{});
    const std::size_t nf = x_.n_features;
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t r = rows_[k];
      const BinStat s = c_.Stat(r);
      const std::uint8_t* code = x_.row(r);
      for (std::size_t f = 0; f < nf; ++f) h[offsets_[f] + code[f]] += s;
    }
  }

  std::vector<std::size_t> CandidateFeatures() {
    std::vector<std::size_t> features(x_.n_features);
    for (std::size_t f = 0; f < features.size(); ++f) features[f] = f;
    if (n_sampled_ < features.size()) {
      for (std::size_t i = 0; i < n_sampled_; ++i) {
        const std::size_t j = i + rng_->UniformIndex(features.size() - i);
        std::swap(features[i], features[j]);
      }
      features.resize(n_sampled_);
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  std::int32_t MakeLeaf(const BinStat& total) {
    TreeNode leaf;
    leaf.value = c_.Leaf(total);
    nodes_->push_back(leaf);
    return static_cast<std::int32_t>(nodes_->size() - 1);
  }

  std::int32_t Split(std::size_t begin, std::size_t end, Hist hist,
                     const BinStat& total, int depth) {
    if (depth >= c_.options.max_depth || !c_.MayDivide(total)) {
      Release(std::move(hist));
      return MakeLeaf(total);
    }
    const double parent_quality = c_.Quality(total);
    double best_gain = 1e-12 * std::max(1.0, std::abs(parent_quality));
    int best_feature = -1;
    int best_bin = -1;
    BinStat best_left;
    for (std::size_t f : CandidateFeatures()) {
      const int bins = x_.num_bins(f);
      BinStat left;
      for (int b = 0; b + 1 < bins; ++b) {
        left += (*hist)[offsets_[f] + b];
        const BinStat right = total - left;
        if (!c_.ChildOk(left)) continue;
        if (!c_.ChildOk(right)) break;
        const double gain =
            c_.Quality(left) + c_.Quality(right) - parent_quality;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = b;
          best_left = left;
        }
      }
    }
    if (best_feature < 0) {
      Release(std::move(hist));
      return MakeLeaf(total);
    }

    // Stable partition keeps row order ascending within every node.
    std::size_t n_left = 0;
    std::size_t n_right = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t r = rows_[k];
      if (x_.row(r)[best_feature] <= best_bin) {
        rows_[begin + n_left++] = r;
      } else {
        scratch_[n_right++] = r;
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + n_right,
              rows_.begin() + begin + n_left);
    const std::size_t mid = begin + n_left;

    // Build the smaller child directly; the larger one is parent - smaller.
    Hist small = Acquire();
    const bool left_small = n_left <= n_right;
    if (left_small) {
      Build(begin, mid, *small);
    } else {
      Build(mid, end, *small);
    }
    for (std::size_t i = 0; i < hist->size(); ++i) {
      (*hist)[i] = (*hist)[i] - (*small)[i];
    }
    Hist left_hist = left_small ? std::move(small) : std::move(hist);
    Hist right_hist = left_small ? std::move(hist) : std::move(small);

    const std::int32_t id = static_cast<std::int32_t>(nodes_->size());
    TreeNode node;
    node.feature = best_feature;
    node.threshold = x_.cuts[best_feature][best_bin];
    nodes_->push_back(node);
    const BinStat right_total = total - best_left;
    const std::int32_t l =
        Split(begin, mid, std::move(left_hist), best_left, depth + 1);
    const std::int32_t r =
        Split(mid, end, std::move(right_hist), right_total, depth + 1);
    (*nodes_)[id].left = l;
    (*nodes_)[id].right = r;
    return id;
  }

  const BinnedMatrix& x_;
  Criterion c_;
  SplitMix64* rng_;
  std::vector<std::size_t> offsets_;
  std::size_t n_sampled_ = 1;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> scratch_;
  std::vector<Hist> pool_;
  std::vector<TreeNode>* nodes_ = nullptr;
};

}  // namespace

int Tree::Depth() const { return nodes.empty() ? 0 : DepthFrom(nodes, 0); }

int Tree::NumLeaves() const {
  return static_cast<int>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Tree GrowGiniTree(const BinnedMatrix& x, std::span<const double> labels,
                  std::span<const double> weights, const GrowOptions& options,
                  SplitMix64& rng) {
  std::vector<std::uint32_t> rows;
  rows.reserve(x.n_rows);
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    if (weights[i] > 0.0) rows.push_back(static_cast<std::uint32_t>(i));
  }
  Grower<GiniCriterion> grower(x, GiniCriterion{labels, weights, options},
                               &rng);
  return grower.Grow(std::move(rows));
}

Tree GrowNewtonTree(const BinnedMatrix& x, std::span<const double> grad,
                    std::span<const double> hess,
                    std::vector<std::uint32_t> rows,
                    const GrowOptions& options) {
  SplitMix64 unused(0);
  GrowOptions o = options;
  o.feature_fraction = 1.0;
  Grower<NewtonCriterion> grower(x, NewtonCriterion{grad, hess, o}, &unused);
  return grower.Grow(std::move(rows));
}

}  // namespace biasforge

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

#include "biasforge/hist_tree.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "biasforge/binning.h"
#include "biasforge/rng.h"
#include "gtest/gtest.h"

namespace biasforge {
namespace {

FeatureMatrix RandomMatrix(std::size_t n, std::size_t nf, int levels,
                           SplitMix64& rng) {
  FeatureMatrix m;
  m.n_rows = n;
  m.n_features = nf;
  m.values.resize(n * nf);
  for (double& v : m.values) {
    v = levels > 0 ? static_cast<double>(rng.UniformIndex(levels))
                   : rng.Normal();
  }
  return m;
}

// Weighted Gini impurity times weight: 2 s (w - s) / w.
double GiniMass(double w, double s) { return w > 0 ? 2 * s * (w - s) / w : 0; }

// Exhaustive search over every feature and every observed threshold.
double BestGiniDecrease(const FeatureMatrix& x, const std::vector<double>& y,
                        const std::vector<double>& w, double min_leaf) {
  double total_w = 0, total_s = 0;
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    total_w += w[i];
    total_s += w[i] * y[i];
  }
  double best = 0;
  for (std::size_t f = 0; f < x.n_features; ++f) {
    std::set<double> thresholds;
    for (std::size_t i = 0; i < x.n_rows; ++i) thresholds.insert(x.row(i)[f]);
    for (double t : thresholds) {
      double lw = 0, ls = 0;
      for (std::size_t i = 0; i < x.n_rows; ++i) {
        if (x.row(i)[f] <= t) {
          lw += w[i];
          ls += w[i] * y[i];
        }
      }
      if (lw < min_leaf || total_w - lw < min_leaf || lw <= 0 ||
          total_w - lw <= 0) {
        continue;
      }
      best = std::max(best, GiniMass(total_w, total_s) - GiniMass(lw, ls) -
                                GiniMass(total_w - lw, total_s - ls));
    }
  }
  return best;
}

TEST(BinFeaturesTest, FewDistinctValuesBinExactly) {
  SplitMix64 rng(1);
  FeatureMatrix x = RandomMatrix(500, 3, 10, rng);
  BinnedMatrix b = BinFeatures(x);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(b.num_bins(f), 10);
    for (std::size_t i = 0; i < x.n_rows; ++i) {
      EXPECT_EQ(b.row(i)[f], static_cast<int>(x.row(i)[f]));
    }
  }
}

TEST(BinFeaturesTest, CodeOrderMatchesCutComparison) {
  SplitMix64 rng(2);
  FeatureMatrix x = RandomMatrix(5000, 2, 0, rng);
  BinnedMatrix b = BinFeatures(x, 64);
  for (std::size_t f = 0; f < 2; ++f) {
    ASSERT_LE(b.num_bins(f), 64);
    EXPECT_GE(b.num_bins(f), 60);
    EXPECT_TRUE(std::is_sorted(b.cuts[f].begin(), b.cuts[f].end()));
    for (std::size_t i = 0; i < x.n_rows; ++i) {
      const int code = b.row(i)[f];
      for (int k = 0; k + 1 < b.num_bins(f); ++k) {
        ASSERT_EQ(code <= k, x.row(i)[f] <= b.cuts[f][k]);
      }
    }
  }
}

TEST(BinFeaturesTest, ConstantColumnHasOneBin) {
  FeatureMatrix x{4, 1, {2.0, 2.0, 2.0, 2.0}};
  BinnedMatrix b = BinFeatures(x);
  EXPECT_EQ(b.num_bins(0), 1);
  EXPECT_EQ(b.row(3)[0], 0);
}

TEST(GrowGiniTreeTest, DepthOneCannotRepresentXor) {
  FeatureMatrix x{4, 2, {0, 0, 0, 1, 1, 0, 1, 1}};
  std::vector<double> y = {0, 1, 1, 0};
  std::vector<double> w(4, 1.0);
  SplitMix64 rng(3);
  GrowOptions opt;
  opt.max_depth = 1;
  Tree t = GrowGiniTree(BinFeatures(x), y, w, opt, rng);
  int correct = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    correct += (t.Predict(x.row(i)) > 0.5) == (y[i] > 0.5);
  }
  EXPECT_LE(correct, 3);
  EXPECT_LE(t.Depth(), 1);

  opt.max_depth = 2;
  // Depth two is not enough for a greedy grower either: no single split of
  // XOR lowers impurity.
  Tree t2 = GrowGiniTree(BinFeatures(x), y, w, opt, rng);
  EXPECT_EQ(t2.NumLeaves(), 1);
}

TEST(GrowGiniTreeTest, RootSplitMatchesExhaustiveSearch) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 20 + rng.UniformIndex(100);
    FeatureMatrix x = RandomMatrix(n, 3, 12, rng);
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.Bernoulli(0.2 + 0.05 * x.row(i)[0]) ? 1 : 0;
      w[i] = static_cast<double>(rng.UniformIndex(3));
    }
    const double min_leaf = 1.0 + static_cast<double>(rng.UniformIndex(4));
    GrowOptions opt;
    opt.max_depth = 1;
    opt.min_leaf = min_leaf;
    BinnedMatrix b = BinFeatures(x);
    Tree t = GrowGiniTree(b, y, w, opt, rng);
    const double want = BestGiniDecrease(x, y, w, min_leaf);
    if (t.NumLeaves() == 1) {
      EXPECT_NEAR(want, 0.0, 1e-9);
      continue;
    }
    // Recompute the tree's decrease from its own partition.
    double tw = 0, ts = 0, lw = 0, ls = 0;
    const TreeNode& root = t.nodes[0];
    for (std::size_t i = 0; i < n; ++i) {
      tw += w[i];
      ts += w[i] * y[i];
      if (x.row(i)[root.feature] <= root.threshold) {
        lw += w[i];
        ls += w[i] * y[i];
      }
    }
    const double got =
        GiniMass(tw, ts) - GiniMass(lw, ls) - GiniMass(tw - lw, ts - ls);
    EXPECT_NEAR(got, want, 1e-9);
    // Leaves hold the weighted positive fraction.
    EXPECT_NEAR(t.nodes[root.left].value, ls / lw, 1e-12);
    EXPECT_NEAR(t.nodes[root.right].value, (ts - ls) / (tw - lw), 1e-12);
  }
}

TEST(GrowGiniTreeTest, RespectsDepthAndLeafSize) {
  SplitMix64 rng(5);
  const std::size_t n = 2000;
  FeatureMatrix x = RandomMatrix(n, 4, 0, rng);
  std::vector<double> y(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x.row(i)[0] + 0.5 * x.row(i)[1] + rng.Normal() > 0.5;
  }
  BinnedMatrix b = BinFeatures(x);
  for (int depth : {1, 3, 6}) {
    GrowOptions opt;
    opt.max_depth = depth;
    opt.min_leaf = 50;
    Tree t = GrowGiniTree(b, y, w, opt, rng);
    EXPECT_LE(t.Depth(), depth);
    std::vector<int> leaf_rows(t.nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::int32_t k = 0;
      while (!t.nodes[k].is_leaf()) {
        k = x.row(i)[t.nodes[k].feature] <= t.nodes[k].threshold
                ? t.nodes[k].left
                : t.nodes[k].right;
      }
      ++leaf_rows[k];
      EXPECT_EQ(t.nodes[k].value, t.Predict(x.row(i)));
    }
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      if (t.nodes[k].is_leaf()) EXPECT_GE(leaf_rows[k], 50);
    }
  }
}

TEST(GrowGiniTreeTest, PureNodeIsALeaf) {
  FeatureMatrix x{4, 1, {1, 2, 3, 4}};
  std::vector<double> y(4, 1.0), w(4, 1.0);
  SplitMix64 rng(6);
  Tree t = GrowGiniTree(BinFeatures(x), y, w, GrowOptions{}, rng);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].value, 1.0);
}

TEST(GrowGiniTreeTest, DeterministicForRngState) {
  SplitMix64 data_rng(7);
  FeatureMatrix x = RandomMatrix(1000, 6, 0, data_rng);
  std::vector<double> y(1000), w(1000, 1.0);
  for (std::size_t i = 0; i < 1000; ++i) y[i] = x.row(i)[2] > 0.3;
  BinnedMatrix b = BinFeatures(x);
  GrowOptions opt;
  opt.feature_fraction = 0.5;
  SplitMix64 r1(8), r2(8);
  EXPECT_EQ(GrowGiniTree(b, y, w, opt, r1), GrowGiniTree(b, y, w, opt, r2));
}

TEST(GrowNewtonTreeTest, LeavesAreNewtonSteps) {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 30 + rng.UniformIndex(100);
    FeatureMatrix x = RandomMatrix(n, 2, 8, rng);
    std::vector<double> g(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = rng.Normal() + (x.row(i)[1] > 3 ? 1.0 : -1.0);
      h[i] = rng.Uniform(0.1, 1.0);
    }
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0u);
    GrowOptions opt;
    opt.max_depth = 1;
    opt.min_leaf = 1;
    opt.l2 = rng.Uniform(0.0, 2.0);
    Tree t = GrowNewtonTree(BinFeatures(x), g, h, rows, opt);

    // Brute force: best G^2/(H+l2) split over observed thresholds.
    auto score = [&](double gs, double hs) { return gs * gs / (hs + opt.l2); };
    double gt = 0, ht = 0;
    for (std::size_t i = 0; i < n; ++i) {
      gt += g[i];
      ht += h[i];
    }
    double best = 0;
    for (std::size_t f = 0; f < 2; ++f) {
      for (int cut = 0; cut < 8; ++cut) {
        double gl = 0, hl = 0;
        int nl = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (x.row(i)[f] <= cut) {
            gl += g[i];
            hl += h[i];
            ++nl;
          }
        }
        if (nl == 0 || nl == static_cast<int>(n) || hl < 1e-3 ||
            ht - hl < 1e-3) {
          continue;
        }
        best = std::max(best, score(gl, hl) + score(gt - gl, ht - hl) -
                                  score(gt, ht));
      }
    }
    if (t.NumLeaves() == 1) {
      EXPECT_NEAR(best, 0.0, 1e-9);
      EXPECT_NEAR(t.nodes[0].value, -gt / (ht + opt.l2), 1e-12);
      continue;
    }
    const TreeNode& root = t.nodes[0];
    double gl = 0, hl = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x.row(i)[root.feature] <= root.threshold) {
        gl += g[i];
        hl += h[i];
      }
    }
    EXPECT_NEAR(score(gl, hl) + score(gt - gl, ht - hl) - score(gt, ht), best,
                1e-9);
    EXPECT_NEAR(t.nodes[root.left].value, -gl / (hl + opt.l2), 1e-12);
    EXPECT_NEAR(t.nodes[root.right].value, -(gt - gl) / (ht - hl + opt.l2),
                1e-12);
  }
}

TEST(GrowNewtonTreeTest, OnlyListedRowsContribute) {
  FeatureMatrix x{6, 1, {0, 1, 2, 3, 4, 5}};
  std::vector<double> g = {-1, -1, -1, 1, 1, 1};
  std::vector<double> h(6, 1.0);
  GrowOptions opt;
  opt.max_depth = 1;
  opt.l2 = 0.0;
  // Rows 1 and 4 only: a single split at x <= 1.
  Tree t = GrowNewtonTree(BinFeatures(x), g, h, {1, 4}, opt);
  ASSERT_EQ(t.NumLeaves(), 2);
  EXPECT_DOUBLE_EQ(t.nodes[t.nodes[0].left].value, 1.0);
  EXPECT_DOUBLE_EQ(t.nodes[t.nodes[0].right].value, -1.0);
  double row[1] = {1.0};
  EXPECT_DOUBLE_EQ(t.Predict(row), 1.0);
}

}  // namespace
}  // namespace biasforge

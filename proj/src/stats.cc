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

#include "biasforge/stats.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace biasforge::stats {

double NormalSurvival(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double TwoSidedNormalPValue(double z) {
  return std::min(1.0, std::erfc(std::abs(z) / std::numbers::sqrt2));
}

double ExactBinomialHalfPValue(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) return 1.0;
  const std::int64_t m = std::min(successes, trials - successes);
  // log P[X = i] = lgamma(n+1) - lgamma(i+1) - lgamma(n-i+1) - n log 2
  const double log_norm =
      std::lgamma(trials + 1.0) - trials * std::numbers::ln2;
  double tail = 0.0;
  for (std::int64_t i = 0; i <= m; ++i) {
    tail += std::exp(log_norm - std::lgamma(i + 1.0) -
                     std::lgamma(trials - i + 1.0));
  }
  return std::min(1.0, 2.0 * tail);
}

double ChiSquareSurvival(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double KolmogorovSurvival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Q = 1 - sqrt(2 pi)/lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2))
    const double y = std::exp(-std::numbers::pi * std::numbers::pi /
                              (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int j = 1; j <= 6; ++j) {
      const int k = 2 * j - 1;
      sum += std::pow(y, static_cast<double>(k * k));
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  // Q = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2)
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult KolmogorovSmirnov(std::span<const double> a,
                             std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / n1 - j / n2));
  }
  const double ne = n1 * n2 / (n1 + n2);
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  return {d, KolmogorovSurvival(lambda)};
}

TestResult ChiSquareTwoSample(std::span<const double> a,
                              std::span<const double> b) {
  std::map<double, std::pair<double, double>> table;
  for (double v : a) table[v].first += 1.0;
  for (double v : b) table[v].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  if (table.size() < 2 || na == 0.0 || nb == 0.0) return {};
  double chi2 = 0.0;
  for (const auto& [level, counts] : table) {
    const double row = counts.first + counts.second;
    const double ea = row * na / n;
    const double eb = row * nb / n;
    chi2 += (counts.first - ea) * (counts.first - ea) / ea;
    chi2 += (counts.second - eb) * (counts.second - eb) / eb;
  }
  const double df = static_cast<double>(table.size() - 1);
  return {chi2, ChiSquareSurvival(chi2, df)};
}

TestResult TwoProportionZ(std::int64_t successes_a, std::int64_t n_a,
                          std::int64_t successes_b, std::int64_t n_b) {
  if (n_a == 0 || n_b == 0) return {};
  const double pa = static_cast<double>(successes_a) / n_a;
  const double pb = static_cast<double>(successes_b) / n_b;
  const double pooled =
      static_cast<double>(successes_a + successes_b) / (n_a + n_b);
  const double var = pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b);
  if (var <= 0.0) return {};
  const double z = (pa - pb) / std::sqrt(var);
  return {z, TwoSidedNormalPValue(z)};
}

}  // namespace biasforge::stats

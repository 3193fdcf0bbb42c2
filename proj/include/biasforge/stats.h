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

#ifndef BIASFORGE_STATS_H_
#define BIASFORGE_STATS_H_

#include <cstdint>
#include <span>

namespace biasforge::stats {

// Upper tail of the standard normal.
double NormalSurvival(double z);

// Two-sided p-value for a standard normal statistic.
double TwoSidedNormalPValue(double z);

// Exact two-sided binomial test of P = 1/2 (doubling the smaller tail).
double ExactBinomialHalfPValue(std::int64_t successes, std::int64_t trials);

// Upper tail of the chi-square distribution with `df` degrees of freedom.
double ChiSquareSurvival(double x, double df);

// Asymptotic Kolmogorov distribution tail Q(lambda) = P[K > lambda].
double KolmogorovSurvival(double lambda);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test. Ties are handled by stepping both
// empirical CDFs over each distinct value. The p-value uses the asymptotic
// distribution with Stephens' small-sample correction.
TestResult KolmogorovSmirnov(std::span<const double> a,
                             std::span<const double> b);

// Pearson chi-square independence test on a categorical variable observed in
// two samples (levels x 2 contingency table).
TestResult ChiSquareTwoSample(std::span<const double> a,
                              std::span<const double> b);

// Pooled two-proportion z-test. Returns statistic 0, p 1 when the pooled
// proportion is 0 or 1.
TestResult TwoProportionZ(std::int64_t successes_a, std::int64_t n_a,
                          std::int64_t successes_b, std::int64_t n_b);

}  // namespace biasforge::stats

#endif  // BIASFORGE_STATS_H_

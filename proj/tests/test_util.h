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

#ifndef BIASFORGE_TESTS_TEST_UTIL_H_
#define BIASFORGE_TESTS_TEST_UTIL_H_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "biasforge/dataset.h"
#include "gtest/gtest.h"

namespace biasforge::testing {

// Dies with the status message when `expr` is not OK; evaluates to the value.
#define BF_ASSERT_OK_AND_ASSIGN(lhs, expr)                 \
  auto BF_CONCAT(_status_or_, __LINE__) = (expr);          \
  ASSERT_TRUE(BF_CONCAT(_status_or_, __LINE__).ok())       \
      << BF_CONCAT(_status_or_, __LINE__).status();        \
  lhs = std::move(BF_CONCAT(_status_or_, __LINE__)).value()
#define BF_CONCAT_INNER(a, b) a##b
#define BF_CONCAT(a, b) BF_CONCAT_INNER(a, b)

#define BF_ASSERT_OK(expr)             \
  do {                                 \
    auto _st = (expr);                 \
    ASSERT_TRUE(_st.ok()) << _st;      \
  } while (0)

// Dataset with columns t (0..n-1), the given real features, y and, when
// `groups` is non-empty, z with codes 1 = A, 0 = B.
inline TabularDataset MakeDataset(
    const std::vector<double>& labels, const std::vector<double>& groups = {},
    const std::vector<std::pair<std::string, std::vector<double>>>& features =
        {}) {
  std::vector<Column> cols;
  Column t{"t", ColumnType::kTime, {}};
  for (std::size_t i = 0; i < labels.size(); ++i) t.values.push_back(i);
  cols.push_back(std::move(t));
  for (const auto& [name, values] : features) {
    cols.push_back(Column{name, ColumnType::kReal, values});
  }
  cols.push_back(Column{"y", ColumnType::kBinary, labels});
  std::optional<std::string> prot;
  if (!groups.empty()) {
    cols.push_back(Column{"z", ColumnType::kGroup, groups});
    prot = "z";
  }
  auto ds = TabularDataset::Create(std::move(cols), "y", "t", prot);
  EXPECT_TRUE(ds.ok()) << ds.status();
  return *std::move(ds);
}

// Labels with `pos` ones out of `n`, positives spread evenly.
inline std::vector<double> SpreadLabels(std::size_t n, std::size_t pos) {
  std::vector<double> y(n, 0.0);
  for (std::size_t k = 0; k < pos; ++k) y[k * n / pos] = 1.0;
  return y;
}

}  // namespace biasforge::testing

#endif  // BIASFORGE_TESTS_TEST_UTIL_H_

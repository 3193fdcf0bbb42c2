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

#ifndef BIASFORGE_DATASET_H_
#define BIASFORGE_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace biasforge {

enum class ColumnType {
  kReal,
  kBinary,       // values in {0, 1}
  kCategorical,  // non-negative integer codes
  kGroup,        // protected attribute; stored as 1 = A, 0 = B
  kTime,         // non-negative integer, non-decreasing down the rows
};

std::string_view ColumnTypeName(ColumnType type);

// The two protected groups. Stored codes match the aware-model encoding.
enum class Group : std::uint8_t { kA, kB };

inline constexpr double kGroupACode = 1.0;
inline constexpr double kGroupBCode = 0.0;

inline double GroupCode(Group g) {
  return g == Group::kA ? kGroupACode : kGroupBCode;
}
inline Group GroupFromCode(double code) {
  return code == kGroupACode ? Group::kA : Group::kB;
}
inline Group OtherGroup(Group g) { return g == Group::kA ? Group::kB : Group::kA; }
std::string_view GroupName(Group g);

struct Column {
  std::string name;
  ColumnType type = ColumnType::kReal;
  std::vector<double> values;
};

struct DatasetSchema {
  std::vector<std::pair<std::string, ColumnType>> columns;
  std::string label = "y";
  std::optional<std::string> protected_attribute;
  std::string time_index = "t";

  absl::Status Validate() const;

  // Builds a schema from header names: `label` is binary, `time_index` is
  // the time column, `protected_attribute` (when present in the header) is the
  // group column and every other column is real.
  static DatasetSchema FromHeader(std::span<const std::string> header,
                                  std::string label, std::string time_index,
                                  std::optional<std::string> protected_attribute);
};

// Column-oriented table with a binary label, an optional two-valued protected
// attribute and a monotone time index. Immutable: every transformation
// returns a new dataset.
class TabularDataset {
 public:
  static absl::StatusOr<TabularDataset> Create(
      std::vector<Column> columns, std::string label, std::string time_index,
      std::optional<std::string> protected_attribute = std::nullopt);

  std::size_t num_rows() const { return num_rows_; }
  const std::vector<Column>& columns() const { return columns_; }
  const Column* Find(std::string_view name) const;
  absl::StatusOr<std::span<const double>> Values(std::string_view name) const;

  const std::string& label_name() const { return label_; }
  const std::string& time_name() const { return time_index_; }
  const std::optional<std::string>& protected_name() const {
    return protected_;
  }
  bool has_protected() const { return protected_.has_value(); }

  std::span<const double> labels() const;
  std::span<const double> time_index() const;
  // Group codes (see kGroupACode); empty when no protected column is set.
  std::span<const double> groups() const;

  // Model inputs: every column except label, time index and protected
  // attribute, in column order.
  std::vector<std::string> FeatureNames() const;

  DatasetSchema schema() const;

  absl::StatusOr<TabularDataset> WithColumn(Column column) const;
  absl::StatusOr<TabularDataset> WithProtected(Column column) const;
  absl::StatusOr<TabularDataset> WithLabels(std::vector<double> labels) const;
  // Same data with the protected column values replaced (e.g. permuted).
  absl::StatusOr<TabularDataset> WithGroups(std::vector<double> codes) const;
  // Rows [begin, end).
  TabularDataset Slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const TabularDataset&, const TabularDataset&);

 private:
  TabularDataset() = default;
  absl::Status Validate() const;
  std::size_t IndexOf(std::string_view name) const;

  std::vector<Column> columns_;
  std::string label_;
  std::string time_index_;
  std::optional<std::string> protected_;
  std::size_t num_rows_ = 0;
};

// Per-group sizes and positive counts.
struct GroupCounts {
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  std::int64_t pos_a = 0;
  std::int64_t pos_b = 0;

  std::int64_t n(Group g) const { return g == Group::kA ? n_a : n_b; }
  std::int64_t pos(Group g) const { return g == Group::kA ? pos_a : pos_b; }
  double prevalence(Group g) const {
    return n(g) == 0 ? 0.0 : static_cast<double>(pos(g)) / n(g);
  }
};

absl::StatusOr<GroupCounts> CountGroups(const TabularDataset& ds);

// Fraction of Y=1 rows, optionally within one group.
absl::StatusOr<double> Prevalence(const TabularDataset& ds,
                                  std::optional<Group> group = std::nullopt);
absl::StatusOr<double> GroupFraction(const TabularDataset& ds, Group group);

// Train gets the first ceil(train_fraction * n) rows in time order.
absl::StatusOr<std::pair<TabularDataset, TabularDataset>> TemporalSplit(
    const TabularDataset& ds, double train_fraction);

// CSV: mandatory header, ',' separator, '.' decimals, no quoting. Real cells
// use the shortest round-trip representation; binary, categorical and time
// cells are integers; the protected column is written as A or B.
absl::StatusOr<TabularDataset> ParseCsv(std::string_view text,
                                        const DatasetSchema& schema);
absl::StatusOr<TabularDataset> LoadCsv(const std::string& path,
                                       const DatasetSchema& schema);
std::string FormatCsv(const TabularDataset& ds);
absl::Status WriteCsv(const TabularDataset& ds, const std::string& path);

// Header names of a CSV file (first line).
absl::StatusOr<std::vector<std::string>> ReadCsvHeader(const std::string& path);

}  // namespace biasforge

#endif  // BIASFORGE_DATASET_H_

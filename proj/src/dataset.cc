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

#include "biasforge/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "str_util.h"
#include "absl/strings/str_join.h"
#include "biasforge/text_format.h"

namespace biasforge {
namespace {

bool IsInteger(double v) { return std::isfinite(v) && v == std::floor(v); }

// Row numbers in messages are 1-based data rows (the header is row 0).
absl::Status CellError(std::string_view what, std::size_t row,
                       std::string_view column) {
  return absl::InvalidArgumentError(
      StrCat(what, ", row ", row + 1, ", column ", column));
}

absl::Status CheckColumnDomain(const Column& c) {
  for (std::size_t r = 0; r < c.values.size(); ++r) {
    const double v = c.values[r];
    switch (c.type) {
      case ColumnType::kReal:
        if (!std::isfinite(v)) return CellError("non-finite value", r, c.name);
        break;
      case ColumnType::kBinary:
        if (v != 0.0 && v != 1.0) {
          return CellError("binary value out of domain", r, c.name);
        }
        break;
      case ColumnType::kCategorical:
        if (!IsInteger(v) || v < 0) {
          return CellError("categorical code out of domain", r, c.name);
        }
        break;
      case ColumnType::kGroup:
        if (v != kGroupACode && v != kGroupBCode) {
          return CellError("protected attribute out of domain", r, c.name);
        }
        break;
      case ColumnType::kTime:
        if (!IsInteger(v) || v < 0) {
          return CellError("time index must be a non-negative integer", r,
                           c.name);
        }
        if (r > 0 && v < c.values[r - 1]) {
          return CellError("time index not sorted", r, c.name);
        }
        break;
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string_view ColumnTypeName(ColumnType type) {
  switch (type) {
    case ColumnType::kReal: return "real";
    case ColumnType::kBinary: return "binary";
    case ColumnType::kCategorical: return "categorical";
    case ColumnType::kGroup: return "group";
    case ColumnType::kTime: return "time";
  }
  return "unknown";
}

std::string_view GroupName(Group g) { return g == Group::kA ? "A" : "B"; }

absl::Status DatasetSchema::Validate() const {
  std::set<std::string> names;
  for (const auto& [name, type] : columns) {
    if (name.empty()) return absl::InvalidArgumentError("empty column name");
    if (!names.insert(name).second) {
      return absl::InvalidArgumentError(
          StrCat("duplicate column '", name, "'"));
    }
  }
  if (!names.contains(label)) {
    return absl::InvalidArgumentError(
        StrCat("label column '", label, "' not declared"));
  }
  if (!names.contains(time_index)) {
    return absl::InvalidArgumentError(
        StrCat("time-index column '", time_index, "' not declared"));
  }
  if (protected_attribute.has_value() &&
      !names.contains(*protected_attribute)) {
    return absl::InvalidArgumentError(StrCat(
        "protected column '", *protected_attribute, "' not declared"));
  }
  return absl::OkStatus();
}

DatasetSchema DatasetSchema::FromHeader(
    std::span<const std::string> header, std::string label,
    std::string time_index, std::optional<std::string> protected_attribute) {
  DatasetSchema schema;
  schema.label = std::move(label);
  schema.time_index = std::move(time_index);
  bool has_protected = false;
  for (const std::string& name : header) {
    ColumnType type = ColumnType::kReal;
    if (name == schema.label) {
      type = ColumnType::kBinary;
    } else if (name == schema.time_index) {
      type = ColumnType::kTime;
    } else if (protected_attribute.has_value() &&
               name == *protected_attribute) {
      type = ColumnType::kGroup;
      has_protected = true;
    }
    schema.columns.emplace_back(name, type);
  }
  if (has_protected) schema.protected_attribute = protected_attribute;
  return schema;
}

absl::StatusOr<TabularDataset> TabularDataset::Create(
    std::vector<Column> columns, std::string label, std::string time_index,
    std::optional<std::string> protected_attribute) {
  TabularDataset ds;
  ds.columns_ = std::move(columns);
  ds.label_ = std::move(label);
  ds.time_index_ = std::move(time_index);
  ds.protected_ = std::move(protected_attribute);
  ds.num_rows_ = ds.columns_.empty() ? 0 : ds.columns_.front().values.size();
  if (absl::Status s = ds.Validate(); !s.ok()) return s;
  return ds;
}

absl::Status TabularDataset::Validate() const {
  std::set<std::string_view> names;
  for (const Column& c : columns_) {
    if (!names.insert(c.name).second) {
      return absl::InvalidArgumentError(
          StrCat("duplicate column '", c.name, "'"));
    }
    if (c.values.size() != num_rows_) {
      return absl::InvalidArgumentError(
          StrCat("column '", c.name, "' has ", c.values.size(),
                       " rows, expected ", num_rows_));
    }
  }
  const Column* label = Find(label_);
  if (label == nullptr) {
    return absl::InvalidArgumentError(
        StrCat("missing label column '", label_, "'"));
  }
  for (std::size_t r = 0; r < num_rows_; ++r) {
    if (label->values[r] != 0.0 && label->values[r] != 1.0) {
      return CellError("label out of domain", r, label_);
    }
  }
  const Column* time = Find(time_index_);
  if (time == nullptr) {
    return absl::InvalidArgumentError(
        StrCat("missing time-index column '", time_index_, "'"));
  }
  if (time->type != ColumnType::kTime) {
    return absl::InvalidArgumentError(
        StrCat("column '", time_index_, "' must have time type"));
  }
  if (protected_.has_value()) {
    const Column* z = Find(*protected_);
    if (z == nullptr) {
      return absl::InvalidArgumentError(
          StrCat("missing protected column '", *protected_, "'"));
    }
    if (z->type != ColumnType::kGroup) {
      return absl::InvalidArgumentError(
          StrCat("column '", *protected_, "' must have group type"));
    }
  }
  for (const Column& c : columns_) {
    if (c.type == ColumnType::kGroup &&
        (!protected_.has_value() || c.name != *protected_)) {
      return absl::InvalidArgumentError(StrCat(
          "group column '", c.name, "' is not the protected attribute"));
    }
    if (absl::Status s = CheckColumnDomain(c); !s.ok()) return s;
  }
  return absl::OkStatus();
}

std::size_t TabularDataset::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return columns_.size();
}

const Column* TabularDataset::Find(std::string_view name) const {
  std::size_t i = IndexOf(name);
  return i == columns_.size() ? nullptr : &columns_[i];
}

absl::StatusOr<std::span<const double>> TabularDataset::Values(
    std::string_view name) const {
  const Column* c = Find(name);
  if (c == nullptr) {
    return absl::NotFoundError(StrCat("missing column '", name, "'"));
  }
  return std::span<const double>(c->values);
}

std::span<const double> TabularDataset::labels() const {
  return Find(label_)->values;
}

std::span<const double> TabularDataset::time_index() const {
  return Find(time_index_)->values;
}

std::span<const double> TabularDataset::groups() const {
  if (!protected_.has_value()) return {};
  return Find(*protected_)->values;
}

std::vector<std::string> TabularDataset::FeatureNames() const {
  std::vector<std::string> names;
  for (const Column& c : columns_) {
    if (c.name == label_ || c.name == time_index_) continue;
    if (protected_.has_value() && c.name == *protected_) continue;
    names.push_back(c.name);
  }
  return names;
}

DatasetSchema TabularDataset::schema() const {
  DatasetSchema s;
  for (const Column& c : columns_) s.columns.emplace_back(c.name, c.type);
  s.label = label_;
  s.time_index = time_index_;
  s.protected_attribute = protected_;
  return s;
}

absl::StatusOr<TabularDataset> TabularDataset::WithColumn(Column column) const {
  if (column.type == ColumnType::kGroup) return WithProtected(std::move(column));
  std::vector<Column> cols = columns_;
  cols.push_back(std::move(column));
  return Create(std::move(cols), label_, time_index_, protected_);
}

absl::StatusOr<TabularDataset> TabularDataset::WithProtected(
    Column column) const {
  if (protected_.has_value()) {
    return absl::FailedPreconditionError(StrCat(
        "protected column '", *protected_, "' already present"));
  }
  column.type = ColumnType::kGroup;
  std::string name = column.name;
  std::vector<Column> cols = columns_;
  cols.push_back(std::move(column));
  return Create(std::move(cols), label_, time_index_, std::move(name));
}

absl::StatusOr<TabularDataset> TabularDataset::WithLabels(
    std::vector<double> labels) const {
  std::vector<Column> cols = columns_;
  cols[IndexOf(label_)].values = std::move(labels);
  return Create(std::move(cols), label_, time_index_, protected_);
}

absl::StatusOr<TabularDataset> TabularDataset::WithGroups(
    std::vector<double> codes) const {
  if (!protected_.has_value()) {
    return absl::FailedPreconditionError("no protected column");
  }
  std::vector<Column> cols = columns_;
  cols[IndexOf(*protected_)].values = std::move(codes);
  return Create(std::move(cols), label_, time_index_, protected_);
}

TabularDataset TabularDataset::Slice(std::size_t begin, std::size_t end) const {
  TabularDataset out;
  out.label_ = label_;
  out.time_index_ = time_index_;
  out.protected_ = protected_;
  out.num_rows_ = end - begin;
  out.columns_.reserve(columns_.size());
  for (const Column& c : columns_) {
    out.columns_.push_back(
        Column{c.name, c.type,
               std::vector<double>(c.values.begin() + begin,
                                   c.values.begin() + end)});
  }
  return out;
}

bool operator==(const TabularDataset& a, const TabularDataset& b) {
  if (a.label_ != b.label_ || a.time_index_ != b.time_index_ ||
      a.protected_ != b.protected_ || a.num_rows_ != b.num_rows_ ||
      a.columns_.size() != b.columns_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.columns_.size(); ++i) {
    const Column& x = a.columns_[i];
    const Column& y = b.columns_[i];
    if (x.name != y.name || x.type != y.type || x.values != y.values) {
      return false;
    }
  }
  return true;
}

absl::StatusOr<GroupCounts> CountGroups(const TabularDataset& ds) {
  if (!ds.has_protected()) {
    return absl::FailedPreconditionError("dataset has no protected column");
  }
  GroupCounts counts;
  auto y = ds.labels();
  auto z = ds.groups();
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const bool pos = y[i] == 1.0;
    if (z[i] == kGroupACode) {
      ++counts.n_a;
      counts.pos_a += pos;
    } else {
      ++counts.n_b;
      counts.pos_b += pos;
    }
  }
  return counts;
}

absl::StatusOr<double> Prevalence(const TabularDataset& ds,
                                  std::optional<Group> group) {
  if (!group.has_value()) {
    if (ds.num_rows() == 0) {
      return absl::FailedPreconditionError("prevalence of an empty dataset");
    }
    double positives = 0;
    for (double y : ds.labels()) positives += y;
    return positives / static_cast<double>(ds.num_rows());
  }
  absl::StatusOr<GroupCounts> counts = CountGroups(ds);
  if (!counts.ok()) return counts.status();
  if (counts->n(*group) == 0) {
    return absl::FailedPreconditionError(
        StrCat("group ", GroupName(*group), " absent from data"));
  }
  return counts->prevalence(*group);
}

absl::StatusOr<double> GroupFraction(const TabularDataset& ds, Group group) {
  absl::StatusOr<GroupCounts> counts = CountGroups(ds);
  if (!counts.ok()) return counts.status();
  if (ds.num_rows() == 0) {
    return absl::FailedPreconditionError("group fraction of an empty dataset");
  }
  return static_cast<double>(counts->n(group)) /
         static_cast<double>(ds.num_rows());
}

absl::StatusOr<std::pair<TabularDataset, TabularDataset>> TemporalSplit(
    const TabularDataset& ds, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        StrCat("train fraction ", train_fraction, " not in (0,1)"));
  }
  // long double keeps e.g. 0.7 * 10 from rounding up past 7.
  const auto n = ds.num_rows();
  const auto n_train = static_cast<std::size_t>(
      std::ceil(static_cast<long double>(train_fraction) * n));
  if (n_train == 0 || n_train >= n) {
    return absl::InvalidArgumentError(StrCat(
        "temporal split of ", n, " rows at fraction ", train_fraction,
        " leaves an empty side"));
  }
  return std::make_pair(ds.Slice(0, n_train), ds.Slice(n_train, n));
}

absl::StatusOr<TabularDataset> ParseCsv(std::string_view text,
                                        const DatasetSchema& schema) {
  if (absl::Status s = schema.Validate(); !s.ok()) return s;
  std::vector<std::string_view> lines = Split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  if (lines.empty()) return absl::InvalidArgumentError("missing header row");

  std::vector<std::string> header;
  for (std::string_view h : Split(lines[0], ',')) header.emplace_back(h);
  std::vector<Column> columns;
  std::vector<std::size_t> declared_index;
  for (const std::string& name : header) {
    auto it = std::find_if(schema.columns.begin(), schema.columns.end(),
                           [&](const auto& c) { return c.first == name; });
    if (it == schema.columns.end()) {
      return absl::InvalidArgumentError(
          StrCat("unexpected column '", name, "' in header"));
    }
    columns.push_back(Column{name, it->second, {}});
  }
  for (const auto& [name, type] : schema.columns) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      return absl::InvalidArgumentError(
          StrCat("missing column '", name, "' in header"));
    }
  }
  for (Column& c : columns) c.values.reserve(lines.size() - 1);

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t row = r - 1;
    std::vector<std::string_view> cells = Split(lines[r], ',');
    if (cells.size() != columns.size()) {
      return absl::InvalidArgumentError(
          StrCat("row ", row + 1, " has ", cells.size(),
                       " cells, expected ", columns.size()));
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      Column& col = columns[c];
      std::string_view cell = cells[c];
      if (cell.empty()) return CellError("missing value", row, col.name);
      if (col.type == ColumnType::kGroup) {
        if (cell == "A") {
          col.values.push_back(kGroupACode);
        } else if (cell == "B") {
          col.values.push_back(kGroupBCode);
        } else {
          return CellError("protected attribute out of domain", row, col.name);
        }
        continue;
      }
      std::optional<double> v = ParseDouble(cell);
      if (!v.has_value()) {
        return CellError(StrCat("unparseable cell '", cell, "'"), row,
                         col.name);
      }
      if (col.name == schema.label && *v != 0.0 && *v != 1.0) {
        return CellError("label out of domain", row, col.name);
      }
      col.values.push_back(*v);
    }
  }
  return TabularDataset::Create(std::move(columns), schema.label,
                                schema.time_index, schema.protected_attribute);
}

absl::StatusOr<TabularDataset> LoadCsv(const std::string& path,
                                       const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), schema);
}

std::string FormatCsv(const TabularDataset& ds) {
  std::string out;
  const auto& cols = ds.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c > 0) out += ',';
    out += cols[c].name;
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c > 0) out += ',';
      const double v = cols[c].values[r];
      switch (cols[c].type) {
        case ColumnType::kReal:
          out += FormatDouble(v);
          break;
        case ColumnType::kGroup:
          out += GroupName(GroupFromCode(v));
          break;
        default:
          out += std::to_string(static_cast<std::int64_t>(v));
          break;
      }
    }
    out += '\n';
  }
  return out;
}

absl::Status WriteCsv(const TabularDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(StrCat("cannot write ", path));
  out << FormatCsv(ds);
  if (!out) return absl::DataLossError(StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<std::string>> ReadCsvHeader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(StrCat("cannot open ", path));
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(StrCat("empty file ", path));
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> names;
  for (std::string_view n : Split(line, ',')) names.emplace_back(n);
  return names;
}

}  // namespace biasforge

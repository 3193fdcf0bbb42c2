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

// Thin adapters over absl string utilities. The system absl is built with
// its own string_view type, so std::string_view arguments are converted
// before forwarding.

#ifndef BIASFORGE_SRC_STR_UTIL_H_
#define BIASFORGE_SRC_STR_UTIL_H_

#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace biasforge {
namespace str_internal {

inline absl::string_view ToAbsl(std::string_view s) {
  return absl::string_view(s.data(), s.size());
}
inline std::string_view ToStd(absl::string_view s) {
  return std::string_view(s.data(), s.size());
}

template <typename T>
decltype(auto) Adapt(const T& value) {
  if constexpr (std::is_convertible_v<const T&, std::string_view> &&
                !std::is_same_v<T, std::string>) {
    return ToAbsl(std::string_view(value));
  } else {
    return (value);
  }
}

}  // namespace str_internal

template <typename... Args>
std::string StrCat(const Args&... args) {
  return absl::StrCat(str_internal::Adapt(args)...);
}

template <typename... Args>
void StrAppend(std::string* out, const Args&... args) {
  absl::StrAppend(out, str_internal::Adapt(args)...);
}

// Splits on `sep`; pieces view into `text`.
inline std::vector<std::string_view> Split(std::string_view text, char sep,
                                           bool skip_empty = false) {
  std::vector<std::string_view> out;
  const absl::string_view t = str_internal::ToAbsl(text);
  if (skip_empty) {
    for (absl::string_view piece : absl::StrSplit(t, sep, absl::SkipEmpty())) {
      out.push_back(str_internal::ToStd(piece));
    }
  } else {
    for (absl::string_view piece : absl::StrSplit(t, sep)) {
      out.push_back(str_internal::ToStd(piece));
    }
  }
  return out;
}

// Splits at the first `sep`; the second half is empty if `sep` is absent.
inline std::pair<std::string_view, std::string_view> SplitOnce(
    std::string_view text, char sep) {
  const std::size_t pos = text.find(sep);
  if (pos == std::string_view::npos) return {text, std::string_view()};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

inline std::string_view StripWhitespace(std::string_view s) {
  return str_internal::ToStd(
      absl::StripAsciiWhitespace(str_internal::ToAbsl(s)));
}

inline std::string_view StripSuffix(std::string_view s,
                                    std::string_view suffix) {
  return str_internal::ToStd(
      absl::StripSuffix(str_internal::ToAbsl(s), str_internal::ToAbsl(suffix)));
}

}  // namespace biasforge

#endif  // BIASFORGE_SRC_STR_UTIL_H_

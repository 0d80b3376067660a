/*
 * Copyright 2026 The bdcode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Design files.
//
// Text format: '#' starts a comment, blank lines are ignored. The first
// content line is the header
//
//   m=20 n=4 N=4 K=6 r=30 T=5 mu=1/2
//
// followed by exactly one line per batch in index order:
//
//   <1-based batch index> <comma-separated label> <T integers>
//
// The label must equal the lexicographic label of that index.
//
// JSON format: {"format": "bdcode-design", "params": {...same keys...},
// "batches": [{"index": 1, "label": [1, 2], "rows": [2, 0, 0, 0, 0]}, ...]}

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "bdcode/design.hpp"

namespace bdcode {

class ParseError : public std::runtime_error {
 public:
  ParseError(Count line, std::string field, const std::string& message);
  Count line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  Count line_;
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header text "m=.. n=.. N=.. K=.. r=.. T=.. mu=p/q".
std::string format_parameters(const RawParameters& raw);
/// Parses whitespace-separated key=value tokens; missing keys stay at their
/// RawParameters defaults. `line` is only used for error messages.
RawParameters parse_parameters(const std::string& text, Count line = 1);

/// `note`, when non-empty, is written as an extra comment line.
void write_design_text(std::ostream& os, const StorageDesign& design, const std::string& note = {});
StorageDesign read_design_text(std::istream& is);

/// `note`, when non-empty, is stored under "note".
std::string design_to_json(const StorageDesign& design, const std::string& note = {});
StorageDesign design_from_json(const std::string& text);

/// Writes JSON when the path ends in ".json", text otherwise.
void save_design(const std::filesystem::path& path, const StorageDesign& design,
                 const std::string& note = {});
/// Detects the format from the first non-blank character.
StorageDesign load_design(const std::filesystem::path& path);

}  // namespace bdcode

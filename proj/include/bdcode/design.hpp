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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdcode/params.hpp"

namespace bdcode {

/// Server subsets are bitmasks; bit k-1 is server k.
using ServerMask = std::uint32_t;
inline constexpr Count kMaxServers = 31;

inline bool mask_contains(ServerMask mask, Count server) {
  return (mask >> (server - 1)) & 1u;
}
inline int mask_size(ServerMask mask) { return __builtin_popcount(mask); }
std::vector<Count> mask_servers(ServerMask mask);
ServerMask servers_mask(const std::vector<Count>& servers);
std::string format_servers(ServerMask mask);  // "1,2,5"

/// The set of servers storing one batch. Servers are 1-based and strictly
/// increasing.
class BatchLabel {
 public:
  explicit BatchLabel(std::vector<Count> servers);

  const std::vector<Count>& servers() const { return servers_; }
  ServerMask mask() const { return mask_; }
  bool contains(Count server) const { return mask_contains(mask_, server); }

  friend bool operator==(const BatchLabel&, const BatchLabel&) = default;
  friend auto operator<=>(const BatchLabel& a, const BatchLabel& b) {
    return a.servers_ <=> b.servers_;
  }

 private:
  std::vector<Count> servers_;
  ServerMask mask_ = 0;
};

/// All C(K, size) labels in lexicographic order. The position of a label is
/// its batch index everywhere in the library.
std::vector<BatchLabel> enumerate_batch_labels(Count servers, Count size);

/// Dense batch_count x partitions matrix; entry (i, j) is the number of rows
/// of partition j stored in batch i. Indices are 0-based.
class AssignmentMatrix {
 public:
  AssignmentMatrix() = default;
  AssignmentMatrix(Count batches, Count partitions, Count fill = 0);

  Count batches() const { return batches_; }
  Count partitions() const { return partitions_; }

  Count& at(Count batch, Count partition) { return data_[index(batch, partition)]; }
  Count at(Count batch, Count partition) const { return data_[index(batch, partition)]; }

  Count row_sum(Count batch) const;
  Count column_sum(Count partition) const;
  Count total() const;

  const std::vector<Count>& data() const { return data_; }

  friend bool operator==(const AssignmentMatrix&, const AssignmentMatrix&) = default;
  /// Row-major lexicographic order; used for solver tie-breaks.
  friend auto operator<=>(const AssignmentMatrix& a, const AssignmentMatrix& b) {
    return a.data_ <=> b.data_;
  }

 private:
  std::size_t index(Count batch, Count partition) const {
    return static_cast<std::size_t>(batch * partitions_ + partition);
  }
  Count batches_ = 0;
  Count partitions_ = 0;
  std::vector<Count> data_;
};

struct AssignmentViolation {
  enum class Kind { kShape, kNegativeEntry, kRowSum, kColumnSum };
  Kind kind;
  Count index = 0;  // row or column; for kNegativeEntry the flattened index
  Count actual = 0;
  Count expected = 0;

  std::string describe() const;
};

/// Every violated row/column condition; empty means valid.
std::vector<AssignmentViolation> validate_assignment(const SystemParameters& p,
                                                     const AssignmentMatrix& matrix);

class DesignError : public std::invalid_argument {
 public:
  explicit DesignError(std::vector<AssignmentViolation> violations);
  const std::vector<AssignmentViolation>& violations() const { return violations_; }

 private:
  std::vector<AssignmentViolation> violations_;
};

/// Parameters, lexicographic labels and a valid assignment. Immutable.
class StorageDesign {
 public:
  /// Throws DesignError if the assignment violates either sum condition.
  StorageDesign(SystemParameters params, AssignmentMatrix assignment);

  const SystemParameters& params() const { return params_; }
  const std::vector<BatchLabel>& labels() const { return labels_; }
  const AssignmentMatrix& assignment() const { return assignment_; }
  ServerMask label_mask(Count batch) const { return labels_[static_cast<std::size_t>(batch)].mask(); }

 private:
  SystemParameters params_;
  std::vector<BatchLabel> labels_;
  AssignmentMatrix assignment_;
};

/// Contiguous 1-based coded-row indices [first, last] of one partition.
struct RowRange {
  Count partition = 0;  // 0-based
  Count first = 0;
  Count last = 0;
  Count size() const { return last - first + 1; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Rows stored in `batch` under the sequential convention: each partition's
/// rows are handed out in index order as batches are scanned top to bottom.
std::vector<RowRange> rows_of(const StorageDesign& design, Count batch);

}  // namespace bdcode

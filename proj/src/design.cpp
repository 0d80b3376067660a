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

#include "bdcode/design.hpp"

#include <sstream>

namespace bdcode {

std::vector<Count> mask_servers(ServerMask mask) {
  std::vector<Count> out;
  for (Count k = 1; mask != 0; ++k, mask >>= 1) {
    if (mask & 1u) out.push_back(k);
  }
  return out;
}

ServerMask servers_mask(const std::vector<Count>& servers) {
  ServerMask mask = 0;
  for (Count s : servers) {
    if (s < 1 || s > kMaxServers) throw std::invalid_argument("server index out of range");
    mask |= ServerMask{1} << (s - 1);
  }
  return mask;
}

std::string format_servers(ServerMask mask) {
  std::string out;
  for (Count s : mask_servers(mask)) {
    if (!out.empty()) out += ',';
    out += std::to_string(s);
  }
  return out;
}

BatchLabel::BatchLabel(std::vector<Count> servers) : servers_(std::move(servers)) {
  for (std::size_t i = 0; i < servers_.size(); ++i) {
    if (servers_[i] < 1 || servers_[i] > kMaxServers) {
      throw std::invalid_argument("batch label server out of range");
    }
    if (i > 0 && servers_[i] <= servers_[i - 1]) {
      throw std::invalid_argument("batch label servers must be strictly increasing");
    }
  }
  mask_ = servers_mask(servers_);
}

std::vector<BatchLabel> enumerate_batch_labels(Count servers, Count size) {
  if (size < 1 || size > servers || servers > kMaxServers) {
    throw std::invalid_argument("enumerate_batch_labels: need 1 <= size <= K <= 31");
  }
  std::vector<BatchLabel> out;
  out.reserve(static_cast<std::size_t>(binomial(servers, size)));
  std::vector<Count> current(static_cast<std::size_t>(size));
  for (Count i = 0; i < size; ++i) current[static_cast<std::size_t>(i)] = i + 1;
  while (true) {
    out.emplace_back(current);
    // advance to the next combination in lexicographic order
    Count i = size - 1;
    while (i >= 0 && current[static_cast<std::size_t>(i)] == servers - size + i + 1) --i;
    if (i < 0) break;
    ++current[static_cast<std::size_t>(i)];
    for (Count k = i + 1; k < size; ++k) {
      current[static_cast<std::size_t>(k)] = current[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  return out;
}

AssignmentMatrix::AssignmentMatrix(Count batches, Count partitions, Count fill)
    : batches_(batches), partitions_(partitions),
      data_(static_cast<std::size_t>(checked_mul(batches, partitions)), fill) {
  if (batches < 0 || partitions < 0) throw std::invalid_argument("negative matrix shape");
}

Count AssignmentMatrix::row_sum(Count batch) const {
  Count s = 0;
  for (Count j = 0; j < partitions_; ++j) s += at(batch, j);
  return s;
}

Count AssignmentMatrix::column_sum(Count partition) const {
  Count s = 0;
  for (Count i = 0; i < batches_; ++i) s += at(i, partition);
  return s;
}

Count AssignmentMatrix::total() const {
  Count s = 0;
  for (Count v : data_) s += v;
  return s;
}

std::string AssignmentViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kShape:
      os << "matrix shape mismatch (" << actual << " vs expected " << expected << ")";
      break;
    case Kind::kNegativeEntry:
      os << "negative entry at flat index " << index << " (" << actual << ")";
      break;
    case Kind::kRowSum:
      os << "row " << index + 1 << " sums to " << actual << ", batch size is " << expected;
      break;
    case Kind::kColumnSum:
      os << "column " << index + 1 << " sums to " << actual << ", rows per partition is "
         << expected;
      break;
  }
  return os.str();
}

std::vector<AssignmentViolation> validate_assignment(const SystemParameters& p,
                                                     const AssignmentMatrix& matrix) {
  using Kind = AssignmentViolation::Kind;
  std::vector<AssignmentViolation> out;
  if (matrix.batches() != p.batch_count) {
    out.push_back({Kind::kShape, 0, matrix.batches(), p.batch_count});
  }
  if (matrix.partitions() != p.partitions) {
    out.push_back({Kind::kShape, 1, matrix.partitions(), p.partitions});
  }
  if (!out.empty()) return out;

  for (std::size_t k = 0; k < matrix.data().size(); ++k) {
    if (matrix.data()[k] < 0) {
      out.push_back({Kind::kNegativeEntry, static_cast<Count>(k), matrix.data()[k], 0});
    }
  }
  for (Count i = 0; i < matrix.batches(); ++i) {
    Count s = matrix.row_sum(i);
    if (s != p.batch_size) out.push_back({Kind::kRowSum, i, s, p.batch_size});
  }
  for (Count j = 0; j < matrix.partitions(); ++j) {
    Count s = matrix.column_sum(j);
    if (s != p.rows_per_partition) out.push_back({Kind::kColumnSum, j, s, p.rows_per_partition});
  }
  return out;
}

namespace {

std::string join_violations(const std::vector<AssignmentViolation>& v) {
  std::string out = "invalid assignment:";
  for (const auto& x : v) out += " [" + x.describe() + "]";
  return out;
}

}  // namespace

DesignError::DesignError(std::vector<AssignmentViolation> violations)
    : std::invalid_argument(join_violations(violations)), violations_(std::move(violations)) {}

StorageDesign::StorageDesign(SystemParameters params, AssignmentMatrix assignment)
    : params_(std::move(params)), assignment_(std::move(assignment)) {
  if (params_.servers > kMaxServers) {
    throw std::invalid_argument("at most 31 servers are supported");
  }
  auto violations = validate_assignment(params_, assignment_);
  if (!violations.empty()) throw DesignError(std::move(violations));
  labels_ = enumerate_batch_labels(params_.servers, params_.servers_per_batch);
}

std::vector<RowRange> rows_of(const StorageDesign& design, Count batch) {
  const auto& P = design.assignment();
  if (batch < 0 || batch >= P.batches()) throw std::out_of_range("batch index");
  std::vector<RowRange> out;
  for (Count t = 0; t < P.partitions(); ++t) {
    Count here = P.at(batch, t);
    if (here == 0) continue;
    Count before = 0;
    for (Count i = 0; i < batch; ++i) before += P.at(i, t);
    out.push_back({t, before + 1, before + here});
  }
  return out;
}

}  // namespace bdcode

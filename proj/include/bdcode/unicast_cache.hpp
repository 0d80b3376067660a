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
#include <vector>

#include "bdcode/design.hpp"

namespace bdcode {

/// Incremental record of every U_Q^(S) for a partially filled assignment,
/// over all C(K, q) finisher sets at one multicast threshold.
///
/// Each (Q, S) pair keeps, per partition, how many more rows it needs. A
/// batch is indexed to the pairs that can see it (S stores it, or at least
/// `threshold` members of Q do), so adding or removing a row only touches
/// those pairs. Deficit units are per responsible vector; multiply by N/q
/// for message counts.
///
/// Single writer. apply() pushes onto an undo stack; commit() clears it.
class UnicastCache {
 public:
  UnicastCache(const SystemParameters& params, Count threshold);
  UnicastCache(const SystemParameters& params, const AssignmentMatrix& partial, Count threshold);

  /// Adds `delta` rows of `partition` to `batch`.
  void apply(Count batch, Count partition, Count delta);
  /// Reverts the most recent apply(). Throws std::logic_error if none.
  void undo();
  void commit() { history_.clear(); }
  std::size_t history_size() const { return history_.size(); }

  /// Sum over (Q, S, t) of max(0, need).
  Count units() const { return units_; }
  /// L_Q: units * (N/q) / (m N C(K,q)).
  Rational objective() const;

  /// Number of (Q, S) pairs indexed by `batch` whose U_Q^(S) is nonzero.
  Count nonzero_pairs(Count batch) const { return nonzero_[static_cast<std::size_t>(batch)]; }
  Count pair_count() const { return static_cast<Count>(pair_units_.size()); }
  Count set_count() const { return static_cast<Count>(sets_.size()); }
  Count threshold() const { return threshold_; }
  const SystemParameters& params() const { return params_; }

  /// U_Q^(S) of one pair in deficit units; pairs are ordered by set then server.
  Count pair_units(Count pair) const { return pair_units_[static_cast<std::size_t>(pair)]; }
  ServerMask pair_set(Count pair) const;
  Count pair_server(Count pair) const;

  /// State equality, ignoring the undo history.
  bool same_state(const UnicastCache& other) const;

 private:
  struct Step {
    std::int32_t batch;
    std::int32_t partition;
    std::int32_t delta;
  };
  void change(Count batch, Count partition, Count delta);

  SystemParameters params_;
  Count threshold_;
  std::vector<ServerMask> sets_;
  std::vector<std::int32_t> pair_set_;     // pair -> set index
  std::vector<std::int32_t> pair_server_;  // pair -> server
  std::vector<std::vector<std::int32_t>> batch_pairs_;  // reverse index
  std::vector<std::vector<std::int32_t>> pair_batches_;
  std::vector<std::int32_t> need_;  // pair * T + t
  std::vector<Count> pair_units_;
  std::vector<Count> nonzero_;
  Count units_ = 0;
  std::vector<Step> history_;
};

}  // namespace bdcode

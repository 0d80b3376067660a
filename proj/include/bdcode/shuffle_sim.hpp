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

// Message-level simulation of the coded shuffle for one finisher set.
//
// Intermediate values are identities (partition, coded row, vector); nothing
// is ever XORed for real. A multicast of segments of unequal length costs the
// longest segment.

#pragma once

#include <string>
#include <vector>

#include "bdcode/design.hpp"
#include "bdcode/evaluation.hpp"

namespace bdcode {

struct MulticastMessage {
  Count round = 0;      // j: each segment set is split j ways
  ServerMask group = 0; // the j + 1 servers exchanging
  Count sender = 0;
  Count units = 0;
};

struct UnicastMessage {
  Count receiver = 0;
  Count partition = 0;  // 0-based
  Count vector = 0;     // 1-based
  Count units = 0;
};

struct ShuffleTrace {
  ServerMask finishers = 0;
  Count threshold = 0;
  std::vector<MulticastMessage> multicasts;
  std::vector<UnicastMessage> unicasts;
  Count multicast_units = 0;
  Count unicast_units = 0;
  /// Distinct values held per finisher (ascending) and partition, summed
  /// over its responsible vectors, after the shuffle.
  std::vector<std::vector<Count>> held;
  Rational load;
  /// multicast_units - m N sum_{j>=threshold} alpha_j / j; zero when every
  /// value set splits evenly.
  Rational rounding_slack;

  /// One line per message plus a summary line.
  std::string to_log() const;
};

/// Responsible vectors of each finisher: the k-th smallest member of Q gets
/// vectors (k-1) N/q + 1 .. k N/q.
std::vector<Count> responsible_vectors(const SystemParameters& p, ServerMask finishers, Count server);

/// Runs multicast rounds j = mu q down to `threshold`, then unicasts every
/// remaining per-partition deficit.
ShuffleTrace simulate_shuffle(const StorageDesign& design, ServerMask finishers, Count threshold);

/// Lower-load trace of s_q and s_q - 1 (when s_q > 1); ties go to s_q.
ShuffleTrace best_strategy_trace(const StorageDesign& design, ServerMask finishers);

/// Largest multicast rounding excess the splitting rule can produce for one
/// finisher set: one unit per sender per group.
Count multicast_slack_bound(const SystemParameters& p, Count threshold);

struct CrossValidation {
  Count sets_checked = 0;
  Count unicast_mismatches = 0;
  Count multicast_mismatches = 0;
  Rational max_rounding_slack;
  std::vector<std::string> details;
  bool ok() const { return unicast_mismatches == 0 && multicast_mismatches == 0; }
};

/// Compares the simulator against remaining_unicasts and the analytic
/// multicast term, per finisher set and strategy.
CrossValidation cross_validate(const StorageDesign& design, const EvaluationMode& mode);

}  // namespace bdcode

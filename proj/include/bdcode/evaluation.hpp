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

// Load and delay of a concrete storage design.
//
// Every kernel has two backends: an OpenMP one that splits the finisher sets
// across threads, and a plain serial reference that the tests compare it
// against. Per-set results are integers and are summed in set order, so both
// backends give bit-identical results for any thread count.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdcode/design.hpp"
#include "bdcode/model.hpp"

namespace bdcode {

enum class Backend { kParallel, kSerial };

/// Exhaustive averages over every finisher set; sampled draws `samples`
/// uniform server permutations from `seed` and takes each one's first q
/// servers as the finisher set.
struct EvaluationMode {
  enum class Kind { kExhaustive, kSampled };
  Kind kind = Kind::kExhaustive;
  Count samples = 0;
  std::uint64_t seed = 0;

  static EvaluationMode exhaustive() { return {}; }
  static EvaluationMode sampled(Count samples, std::uint64_t seed);
  /// "exhaustive" or "sampled:<count>".
  static EvaluationMode parse(const std::string& text, std::uint64_t seed);
  std::string describe() const;
};

/// Exhaustive evaluation is refused above this many finisher sets.
inline constexpr Count kExhaustiveSetLimit = 100000;

/// All C(K, q) finisher sets in lexicographic order.
std::vector<ServerMask> all_finisher_sets(Count servers, Count finishers);

/// Deterministic uniform permutations of 1..K.
std::vector<std::vector<Count>> sample_permutations(Count servers, Count count, std::uint64_t seed);

ServerMask prefix_mask(const std::vector<Count>& order, Count length);

/// Finisher sets for a mode, in evaluation order.
std::vector<ServerMask> finisher_sets(const SystemParameters& p, const EvaluationMode& mode);

struct UnicastTally {
  std::vector<Count> servers;  // members of Q, ascending
  std::vector<Count> units;    // U_Q^(S), already multiplied by N/q
  Count total = 0;
};

/// Values each finisher still needs after multicasting with groups down to
/// size `threshold`. Per partition the deficit is clamped at zero; surplus
/// never offsets another partition.
UnicastTally remaining_unicasts(const StorageDesign& design, ServerMask finishers, Count threshold);

/// U_Q for each set, in the given order.
std::vector<Count> unicast_totals(const StorageDesign& design, const std::vector<ServerMask>& sets,
                                  Count threshold, Backend backend = Backend::kParallel);

struct StrategyLoad {
  Count threshold = 0;
  Rational multicast;  // sum_{j>=threshold} alpha_j / j
  Rational unicast;    // L_Q at this threshold
  Rational total() const { return multicast + unicast; }
};

struct LoadResult {
  Rational load;
  Count threshold = 0;
  std::vector<StrategyLoad> strategies;  // s_q first, then s_q - 1 if available
  Count sets = 0;
};

LoadResult load_bdc(const StorageDesign& design, const EvaluationMode& mode,
                    Backend backend = Backend::kParallel);

/// Load restricted to explicit finisher sets (e.g. a single Q).
LoadResult load_bdc_over(const StorageDesign& design, const std::vector<ServerMask>& sets,
                         Backend backend = Backend::kParallel);

/// True when the union of the batches stored by `servers` holds at least
/// m/T rows of every partition.
bool decodable(const StorageDesign& design, ServerMask servers);

/// Smallest g >= q such that the first g servers of `order` can decode.
Count completion_count(const StorageDesign& design, const std::vector<Count>& order);

GDistribution g_distribution(const StorageDesign& design, const EvaluationMode& mode,
                             Backend backend = Backend::kParallel);

struct PerformanceReport {
  Rational load;
  Count threshold = 0;
  bool second_strategy = false;  // s_q - 1 won
  Rational multicast_load;
  Rational unicast_load;
  GDistribution g;
  double map_delay = 0.0;
  double reduce_delay = 0.0;
  double delay = 0.0;

  // Unpartitioned baseline (T = 1, g = q) and ratios against it.
  Rational baseline_load;
  double baseline_map_delay = 0.0;
  double baseline_reduce_delay = 0.0;
  double baseline_delay = 0.0;
  Rational load_norm;
  double map_delay_norm = 0.0;
  double reduce_delay_norm = 0.0;
  double delay_norm = 0.0;

  EvaluationMode mode;
  Count sets = 0;
};

PerformanceReport evaluate(const StorageDesign& design, const EvaluationMode& mode,
                           Backend backend = Backend::kParallel);

/// Baseline report for the unpartitioned scheme with g = q.
PerformanceReport evaluate_unpartitioned(const SystemParameters& p);

/// Flat "key=value" lines.
std::string to_key_value(const PerformanceReport& report);

/// Column order is fixed:
/// L,L_norm,D_map,D_reduce,D,D_norm,g_mean,strategy_threshold,mode,samples,seed
std::string report_csv_header();
std::string to_csv_row(const PerformanceReport& report);

/// %.12g formatting used by every CSV writer.
std::string format_real(double value);

}  // namespace bdcode

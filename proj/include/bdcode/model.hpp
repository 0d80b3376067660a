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

// Closed-form load and delay model of the unpartitioned coded scheme.

#pragma once

#include <optional>
#include <vector>

#include "bdcode/params.hpp"

namespace bdcode {

/// Shifted-exponential runtime: `sigma` operations split across
/// `server_count` servers, waiting for the `wait_for`-th to finish.
struct DelayParameters {
  double sigma = 0.0;
  Count server_count = 0;
  Count wait_for = 0;
};

/// Expected runtime of the wait_for-th fastest server,
/// sigma * (1 + sum_{j=K-g+1}^{K} 1/j).
double order_statistic_mean(const DelayParameters& p);

/// Probability mass over the number of servers g the map phase waits for.
/// mass[i] is P(g = first + i). Exact so point-mass checks need no tolerance.
struct GDistribution {
  Count first = 0;
  std::vector<Rational> mass;

  static GDistribution point_mass(Count g);
  Count last() const { return first + static_cast<Count>(mass.size()) - 1; }
  Rational probability(Count g) const;
  double mean() const;
  bool is_point_mass_at(Count g) const;
  /// Throws std::invalid_argument if mass is negative or sums away from 1.
  void check_normalized() const;

  friend bool operator==(const GDistribution&, const GDistribution&) = default;
};

/// Fraction of values a finisher receives from batches shared with exactly
/// j other finishers, normalized so that the multicast load of round j is
/// alpha(j)/j.
Rational alpha(Count j, const SystemParameters& p);

/// Smallest multicast group size s >= 1 with sum_{l=s}^{mu q} alpha_l <= 1 - mu.
/// Returns mu q + 1 when no such s exists (no multicast rounds).
Count min_multicast_size(const SystemParameters& p);

/// sum_{j=s}^{mu q} alpha_j / j.
Rational multicast_load(const SystemParameters& p, Count threshold);

struct MdsLoad {
  Rational load;
  Count threshold = 0;   // multicast threshold of the winning strategy
  Rational first;        // multicast down to s_q, then unicast the rest
  std::optional<Rational> second;  // multicast down to s_q - 1, when s_q > 1
};

/// Communication load of the unpartitioned MDS scheme.
MdsLoad load_mds(const SystemParameters& p);

/// Map-phase multiplications over all servers, K * mu * m * n * N.
Count sigma_map(const SystemParameters& p);

/// Decoding multiplications for all partitions and vectors,
/// r^2 (1 - q/K) N / T.
Rational sigma_reduce(const SystemParameters& p);

/// Map-phase delay per source row and vector, averaged over g.
double map_delay(const SystemParameters& p, const GDistribution& g);

/// Reduce-phase delay per source row and vector.
double reduce_delay(const SystemParameters& p);

inline double overall_delay(double map, double reduce) { return map + reduce; }

}  // namespace bdcode

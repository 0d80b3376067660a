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

// Parameter sweeps producing one CSV row per point and series.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bdcode/evaluation.hpp"
#include "bdcode/solvers.hpp"

namespace bdcode {

/// Rules for growing the system with K: mu q, mu m, m/T and the code rate
/// m/r stay fixed. When the ideal m = mu_m q / (mu q) is not admissible
/// for a K, the nearest admissible m is used (ties go to the smaller one).
struct ServerScaling {
  Count servers_per_batch = 2;
  Count rows_per_server = 2000;
  Count rows_per_partition = 10;  // m / T
  Rational rate{Rational(2, 3)};  // m / r
  Count columns = 10000;
  /// Input vectors per point; 0 means N = q.
  Count vectors = 0;
};

/// Parameters for K servers under `scaling`. Throws ParameterError when no
/// admissible m exists within a factor of two of the ideal.
SystemParameters scaled_parameters(Count servers, const ServerScaling& scaling);

struct SweepSpec {
  enum class Variable { kPartitions, kServers };
  Variable variable = Variable::kPartitions;
  /// Base system; for a partition sweep its T is replaced per point.
  RawParameters base;
  ServerScaling scaling;
  std::vector<Count> values;
  SolverConfig solver;
  EvaluationMode mode;
  /// Adds a "random_mean" row per point averaged over this many random
  /// assignments (seeds solver.seed, solver.seed + 1, ...). 0 disables it.
  Count random_samples = 0;
};

struct SweepRow {
  Count value = 0;
  std::string series;  // solver name or "random_mean"
  std::uint64_t seed = 0;
  double load = 0.0;
  double load_norm = 0.0;
  double map_delay = 0.0;
  double reduce_delay = 0.0;
  double delay = 0.0;
  double delay_norm = 0.0;
  double g_mean = 0.0;
  /// Exact load; only set for the solver series.
  std::optional<Rational> exact_load;
  std::optional<Rational> exact_load_norm;
  bool valid = true;
  std::string note;
};

SystemParameters sweep_point_parameters(const SweepSpec& spec, Count value);

/// Points run in parallel; rows come back in sweep order, the solver row
/// before the random row of each point. Points whose solver produces an
/// invalid matrix get a row with valid = false and NaN metrics.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// "<var>,L,L_norm,D_map,D_reduce,D,D_norm,g_mean,solver,seed" with <var>
/// being T or K.
std::string sweep_csv_header(const SweepSpec& spec);
std::string to_csv_row(const SweepRow& row);
void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);

}  // namespace bdcode

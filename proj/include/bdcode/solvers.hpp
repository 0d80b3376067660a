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
#include <optional>
#include <string>
#include <vector>

#include "bdcode/design.hpp"
#include "bdcode/unicast_cache.hpp"

namespace bdcode {

enum class SolverKind { kHeuristic, kBranchAndBound, kHybrid, kRandom, kExhaustive };

const char* to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& text);

struct SolverConfig {
  SolverKind kind = SolverKind::kHeuristic;
  std::uint64_t seed = 0;
  /// Hybrid stops once the mean improvement over the last `window`
  /// iterations drops below this load. Default: one unicast message,
  /// 1 / (m N C(K, q)).
  std::optional<Rational> threshold;
  /// Matrix elements decremented per hybrid iteration. 0 picks the default.
  Count decrement_count = 0;
  Count window = 10;
  /// Hard stops; 0 means unlimited.
  Count max_iterations = 0;
  double time_budget_seconds = 0.0;
  /// Branch-and-bound node cap per call; 0 means unlimited.
  Count node_limit = 0;
  /// Upper bound on complete assignments the exhaustive solver may visit.
  Count exhaustive_limit = 2'000'000;
};

/// Default elements decremented per hybrid iteration.
Count default_decrement_count(const SystemParameters& p);
Rational default_hybrid_threshold(const SystemParameters& p);

/// Exact L_BDC objective maintained incrementally over one or two unicast
/// caches (thresholds s_q and s_q - 1). Values are carried as integer keys
/// with a common denominator so the solvers compare without rationals.
class AssignmentObjective {
 public:
  AssignmentObjective(const SystemParameters& params, const AssignmentMatrix& partial);

  void apply(Count batch, Count partition, Count delta);
  void undo();
  void commit();

  /// min over strategies of multicast + L_Q, scaled by key_scale().
  Count key() const;
  /// Admissible lower bound on key() over every completion, given the rows
  /// still to be placed in each batch.
  Count lower_bound(const std::vector<Count>& remaining_per_batch) const;
  Rational to_load(Count key) const;
  Rational value() const { return to_load(key()); }
  /// Key units per unit of load.
  Rational key_scale() const { return key_scale_; }

  const std::vector<UnicastCache>& caches() const { return caches_; }

 private:
  std::vector<UnicastCache> caches_;
  std::vector<Count> offsets_;  // scaled multicast term per strategy
  Count unit_weight_ = 1;       // key per deficit unit
  Rational key_scale_;
};

struct HeuristicResult {
  AssignmentMatrix matrix;
  std::vector<AssignmentViolation> violations;  // empty when valid
  bool valid() const { return violations.empty(); }
};

/// Uniform fill with floor(r / (C(K, mu q) T)), then the cyclic top-up loop.
/// Never repaired: a violating matrix is returned with its violations.
HeuristicResult heuristic_assign(const SystemParameters& p);

struct BranchAndBoundOptions {
  bool bounding = true;
  /// Candidate completion used as the initial incumbent; must extend `start`.
  std::optional<AssignmentMatrix> incumbent;
  Count node_limit = 0;
};

struct BranchAndBoundResult {
  AssignmentMatrix assignment;
  Rational objective;
  Count nodes = 0;
  Count prunes = 0;
  Count leaves = 0;
  bool exhausted = true;  // false when the node limit cut the search short
};

/// Optimal completion of `start`. Batches are branched in index order over
/// every way to fill the row; ties go to the row-major smallest matrix.
/// `objective` must reflect `start` and is restored before returning.
BranchAndBoundResult branch_and_bound_assign(const SystemParameters& p,
                                             const AssignmentMatrix& start,
                                             AssignmentObjective& objective,
                                             const BranchAndBoundOptions& options = {});
BranchAndBoundResult branch_and_bound_assign(const SystemParameters& p,
                                             const AssignmentMatrix& start,
                                             const BranchAndBoundOptions& options = {});

/// Throws std::invalid_argument when a row or column of `partial` already
/// exceeds its target or has negative entries.
void check_partial(const SystemParameters& p, const AssignmentMatrix& partial);

/// Random valid matrix: shuffle r/T tokens of each partition and deal
/// batch_size tokens per batch.
AssignmentMatrix random_assign(const SystemParameters& p, std::uint64_t seed);

struct ExhaustiveResult {
  AssignmentMatrix assignment;
  Rational objective;
  Count visited = 0;
};

/// Global optimum by full enumeration, scored with load_bdc.
ExhaustiveResult exhaustive_assign(const SystemParameters& p, Count limit = 2'000'000);

struct SolverLog {
  std::string solver;
  std::uint64_t seed = 0;
  Count iterations = 0;
  Count nodes = 0;
  Count prunes = 0;
  double wall_seconds = 0.0;
  Rational objective;
  std::vector<Rational> history;  // hybrid objective per iteration
  bool valid = true;
  std::string note;

  std::string to_key_value() const;
};

struct SolverResult {
  AssignmentMatrix assignment;
  SolverLog log;
};

/// hybrid: heuristic seed, then repeated random decrement and optimal
/// re-completion.
SolverResult hybrid_assign(const SystemParameters& p, const SolverConfig& config);

/// Dispatches on config.kind.
SolverResult solve(const SystemParameters& p, const SolverConfig& config);

}  // namespace bdcode

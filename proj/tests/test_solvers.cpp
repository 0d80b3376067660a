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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "bdcode/evaluation.hpp"
#include "bdcode/solvers.hpp"
#include "support.hpp"

using namespace bdcode;
using namespace bdcode::testing;

namespace {

SystemParameters tiny() { return validate_parameters({8, 1, 2, 4, Rational(1, 2), 16, 2}); }

Rational load_of(const SystemParameters& p, const AssignmentMatrix& m) {
  return load_bdc(StorageDesign(p, m), EvaluationMode::exhaustive(), Backend::kSerial).load;
}

// Direct enumeration of every valid matrix, row by row.
Rational brute_force_optimum(const SystemParameters& p) {
  AssignmentMatrix m(p.batch_count, p.partitions);
  std::vector<Count> col(static_cast<std::size_t>(p.partitions), 0);
  std::optional<Rational> best;
  std::function<void(Count, Count, Count)> fill = [&](Count b, Count t, Count left) {
    if (b == p.batch_count) {
      const Rational v = load_of(p, m);
      if (!best || v < *best) best = v;
      return;
    }
    if (t == p.partitions - 1) {
      if (col[static_cast<std::size_t>(t)] + left > p.rows_per_partition) return;
      m.at(b, t) = left;
      col[static_cast<std::size_t>(t)] += left;
      fill(b + 1, 0, p.batch_size);
      col[static_cast<std::size_t>(t)] -= left;
      m.at(b, t) = 0;
      return;
    }
    for (Count c = 0; c <= left && col[static_cast<std::size_t>(t)] + c <= p.rows_per_partition; ++c) {
      m.at(b, t) = c;
      col[static_cast<std::size_t>(t)] += c;
      fill(b, t + 1, left - c);
      col[static_cast<std::size_t>(t)] -= c;
    }
    m.at(b, t) = 0;
  };
  fill(0, 0, p.batch_size);
  return *best;
}

// Small systems the exact solvers can finish quickly.
std::vector<SystemParameters> tiny_pool() {
  std::vector<SystemParameters> out;
  const RawParameters raws[] = {
      {8, 1, 2, 4, Rational(1, 2), 16, 2},  {8, 1, 2, 4, Rational(1, 2), 16, 4},
      {4, 1, 2, 4, Rational(1, 2), 8, 2},   {12, 1, 2, 4, Rational(1, 2), 24, 2},
      {12, 1, 2, 4, Rational(1, 2), 24, 3}, {6, 1, 3, 4, Rational(1, 3), 8, 2},
      {12, 1, 3, 4, Rational(1, 3), 16, 2}, {9, 1, 3, 4, Rational(2, 3), 12, 3},
      {6, 1, 2, 3, Rational(1, 2), 9, 3},   {3, 1, 1, 3, Rational(1), 9, 3},
  };
  for (const auto& r : raws) out.push_back(validate_parameters(r));
  return out;
}

}  // namespace

TEST_CASE("heuristic on the small example") {
  const auto h = heuristic_assign(small_params());
  REQUIRE(h.valid());
  const auto& m = h.matrix;
  const std::vector<Count> row0{1, 1, 0, 0, 0}, row1{0, 0, 1, 1, 0}, row2{1, 0, 0, 0, 1};
  for (Count t = 0; t < 5; ++t) {
    CHECK(m.at(0, t) == row0[static_cast<std::size_t>(t)]);
    CHECK(m.at(1, t) == row1[static_cast<std::size_t>(t)]);
    CHECK(m.at(2, t) == row2[static_cast<std::size_t>(t)]);
    CHECK(m.column_sum(t) == 6);
  }
}

TEST_CASE("heuristic degenerate cases") {
  const auto flat = square_params(1);
  const auto h1 = heuristic_assign(flat);
  for (Count b = 0; b < flat.batch_count; ++b) CHECK(h1.matrix.at(b, 0) == 250);
  const auto p = square_params(250);
  const auto h = heuristic_assign(p);
  CHECK(h.valid());
  CHECK(h.matrix == AssignmentMatrix(36, 250, 1));
}

TEST_CASE("heuristic flag matches the conditions") {
  Count flagged = 0, total = 0;
  for (const auto& s : all_shapes(8)) {
    const auto base = shape_params(s);
    for (Count T = 1; T <= base.source_rows && T <= 60; ++T) {
      if (base.source_rows % T || base.coded_rows % T) continue;
      const auto p = base.with_partitions(T);
      const auto h = heuristic_assign(p);
      CHECK(h.valid() == validate_assignment(p, h.matrix).empty());
      flagged += !h.valid();
      ++total;
    }
  }
  MESSAGE("heuristic flagged " << flagged << " of " << total << " systems");
}

TEST_CASE("random assignments are valid and reproducible") {
  for (const auto& s : all_shapes(7)) {
    const auto p = shape_params(s, 1);
    CHECK(validate_assignment(p, random_assign(p, 3)).empty());
  }
  for (Count T : {2, 5, 10}) {
    const auto p = small_params().with_partitions(T);
    for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(validate_assignment(p, random_assign(p, seed)).empty());
    CHECK(random_assign(p, 7) == random_assign(p, 7));
  }
  const auto f = square_params(3000);
  CHECK(validate_assignment(f, random_assign(f, 1)).empty());
}

TEST_CASE("exhaustive solver against an independent enumeration") {
  const auto p = tiny();
  const auto ex = exhaustive_assign(p);
  CHECK(ex.objective == brute_force_optimum(p));
  CHECK(load_of(p, ex.assignment) == ex.objective);
  const auto flat = small_params().with_partitions(1);
  CHECK(exhaustive_assign(flat).objective == load_mds(flat).load);
  CHECK_THROWS_AS(exhaustive_assign(square_params(3000), 1000), std::length_error);
}

TEST_CASE("branch and bound finds the exhaustive optimum") {
  for (const auto& p : tiny_pool()) {
    const auto ex = exhaustive_assign(p);
    const AssignmentMatrix empty(p.batch_count, p.partitions);
    BranchAndBoundOptions off;
    off.bounding = false;
    const auto with = branch_and_bound_assign(p, empty);
    const auto without = branch_and_bound_assign(p, empty, off);
    CHECK(with.objective == ex.objective);
    CHECK(without.objective == ex.objective);
    CHECK(with.assignment == without.assignment);
    CHECK(with.nodes <= without.nodes);
    CHECK(validate_assignment(p, with.assignment).empty());
    CHECK(load_of(p, with.assignment) == with.objective);
  }
}

TEST_CASE("branch and bound edge cases") {
  const auto p = tiny();
  const auto opt = branch_and_bound_assign(p, AssignmentMatrix(p.batch_count, p.partitions));
  const auto again = branch_and_bound_assign(p, opt.assignment);
  CHECK(again.assignment == opt.assignment);
  CHECK(again.objective == opt.objective);

  const auto flat = small_params().with_partitions(1);
  CHECK(branch_and_bound_assign(flat, AssignmentMatrix(flat.batch_count, 1)).objective == load_mds(flat).load);

  AssignmentMatrix over(p.batch_count, p.partitions);
  over.at(0, 0) = 4;
  over.at(1, 0) = 4;
  over.at(2, 0) = 1;
  CHECK_THROWS_AS(check_partial(p, over), std::invalid_argument);
  CHECK_THROWS_AS(branch_and_bound_assign(p, over), std::invalid_argument);
  AssignmentMatrix negative(p.batch_count, p.partitions);
  negative.at(0, 1) = -1;
  CHECK_THROWS_AS(check_partial(p, negative), std::invalid_argument);
}

TEST_CASE("the bound never exceeds the best completion") {
  Rng rng(5);
  Count checked = 0;
  for (const auto& p : tiny_pool()) {
    for (int trial = 0; trial < 100; ++trial) {
      AssignmentMatrix m = random_assign(p, uniform_below(rng, 1u << 30));
      const Count drops = 1 + static_cast<Count>(uniform_below(rng, static_cast<std::uint64_t>(p.batch_size * 2)));
      for (Count k = 0; k < drops; ++k) {
        const Count b = static_cast<Count>(uniform_below(rng, static_cast<std::uint64_t>(p.batch_count)));
        const Count t = static_cast<Count>(uniform_below(rng, static_cast<std::uint64_t>(p.partitions)));
        if (m.at(b, t) > 0) --m.at(b, t);
      }
      AssignmentObjective objective(p, m);
      std::vector<Count> remaining;
      for (Count b = 0; b < p.batch_count; ++b) remaining.push_back(p.batch_size - m.row_sum(b));
      const Count bound = objective.lower_bound(remaining);
      BranchAndBoundOptions off;
      off.bounding = false;
      const auto best = branch_and_bound_assign(p, m, off);
      CHECK(objective.to_load(bound) <= best.objective);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("objective keys track exact loads") {
  const auto p = small_params();
  AssignmentObjective obj(p, small_design().assignment());
  CHECK(obj.value() == load_of(p, small_design().assignment()));
  const auto h = heuristic_assign(p).matrix;
  AssignmentObjective hobj(p, h);
  CHECK(hobj.value() == load_of(p, h));
}

TEST_CASE("hybrid never gets worse and is deterministic") {
  const auto p = small_params();
  SolverConfig cfg;
  cfg.kind = SolverKind::kHybrid;
  for (std::uint64_t seed : {0u, 1u, 7u}) {
    cfg.seed = seed;
    const auto r = solve(p, cfg);
    CHECK(r.log.valid);
    CHECK(r.log.objective <= load_of(p, heuristic_assign(p).matrix));
    CHECK(r.log.objective == load_of(p, r.assignment));
    for (std::size_t i = 1; i < r.log.history.size(); ++i) CHECK(r.log.history[i] <= r.log.history[i - 1]);
    CHECK(solve(p, cfg).assignment == r.assignment);
  }
  cfg.threshold = Rational(0);
  CHECK_THROWS(solve(p, cfg));
  cfg.threshold.reset();
  cfg.decrement_count = -1;
  CHECK_THROWS(solve(p, cfg));
}

TEST_CASE("hybrid reaches the optimum on tiny systems") {
  for (const auto& p : tiny_pool()) {
    SolverConfig cfg;
    cfg.kind = SolverKind::kHybrid;
    cfg.decrement_count = p.batch_size;
    cfg.window = 30;
    CHECK(hybrid_assign(p, cfg).log.objective == exhaustive_assign(p).objective);
  }
}

TEST_CASE("random mean is no better than hybrid on the square system") {
  const auto p = square_params(1000);
  SolverConfig cfg;
  cfg.kind = SolverKind::kHybrid;
  const Rational hybrid = solve(p, cfg).log.objective;
  Rational sum = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) sum += AssignmentObjective(p, random_assign(p, seed)).value();
  CHECK(sum / 100 >= hybrid);
}

TEST_CASE("solver dispatch and logs") {
  const auto p = tiny();
  for (auto kind : {SolverKind::kHeuristic, SolverKind::kBranchAndBound, SolverKind::kHybrid,
                    SolverKind::kRandom, SolverKind::kExhaustive}) {
    SolverConfig cfg;
    cfg.kind = kind;
    const auto r = solve(p, cfg);
    CHECK(r.log.solver == to_string(kind));
    CHECK(parse_solver_kind(to_string(kind)) == kind);
    CHECK(r.log.objective == load_of(p, r.assignment));
    const auto kv = r.log.to_key_value();
    for (const char* key : {"solver=", "seed=", "iterations=", "nodes=", "prunes=", "wall_seconds="}) {
      CHECK(kv.find(key) != std::string::npos);
    }
  }
  CHECK_THROWS(parse_solver_kind("annealing"));
}

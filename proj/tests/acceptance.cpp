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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "bdcode/design_io.hpp"
#include "bdcode/evaluation.hpp"
#include "bdcode/random.hpp"
#include "bdcode/shuffle_sim.hpp"
#include "bdcode/solvers.hpp"
#include "bdcode/sweep.hpp"
#include "bdcode/unicast_cache.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bdcode;
using namespace bdcode::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << ']';
    }
  }
};

double since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Rational exhaustive_load(const StorageDesign& d) { return load_bdc(d, EvaluationMode::exhaustive()).load; }

void example_end_to_end(Outcome& o) {
  const auto design = small_design();
  const auto trace = best_strategy_trace(design, servers_mask({1, 2, 3, 4}));
  const auto mds = load_mds(design.params()).load;
  o.detail << "multicast=" << trace.multicast_units << " unicast=" << trace.unicast_units
           << " load=" << format_rational(trace.load) << " load_mds=" << format_rational(mds);
  o.require(trace.multicast_units == 12, "12 multicast units");
  o.require(trace.unicast_units == 30, "30 unicast units");
  o.require(trace.load == Rational(21, 40), "load 0.525");
  o.require(mds == Rational(7, 20), "load_mds 0.35");
}

void lossless_partitioning(Outcome& o) {
  for (Count T : {1, 2, 3}) {
    const auto p = validate_parameters({72, 1, 6, 9, Rational(1, 3), 108, T});
    SolverConfig cfg;
    cfg.kind = SolverKind::kHybrid;
    const auto solved = solve(p, cfg);
    const StorageDesign design(p, solved.assignment);
    const auto load = exhaustive_load(design);
    const auto g = g_distribution(design, EvaluationMode::exhaustive());
    o.detail << " T=" << T << ":L=" << format_rational(load) << ",g_mean=" << g.mean();
    o.require(load == load_mds(p).load, "load equals load_mds at T=" + std::to_string(T));
    o.require(g.is_point_mass_at(p.finishers), "g = q at T=" + std::to_string(T));
  }
}

std::vector<Count> square_partitions(Count from, Count to) {
  std::vector<Count> out;
  for (Count T = from; T <= to; ++T)
    if (3000 % T == 0) out.push_back(T);
  return out;
}

void square_delay(Outcome& o) {
  double d50 = 0.0, lo = 1e300, hi = -1e300, worst_rise = 0.0, prev = 1e300;
  for (Count T : square_partitions(50, 3000)) {
    const auto p = square_params(T);
    const auto h = heuristic_assign(p);
    o.require(h.valid(), "heuristic valid at T=" + std::to_string(T));
    const auto r = evaluate(StorageDesign(p, h.matrix), EvaluationMode::exhaustive());
    if (T == 50) d50 = r.delay_norm;
    if (T >= 500) {
      lo = std::min(lo, r.delay_norm);
      hi = std::max(hi, r.delay_norm);
    }
    worst_rise = std::max(worst_rise, r.delay_norm - prev);
    prev = r.delay_norm;
    if (T == 50 || T == 100 || T == 250 || T == 500 || T == 1000 || T == 1500 || T == 3000)
      o.detail << " T=" << T << ":" << r.delay_norm;
  }
  o.detail << " spread(T>=500)=" << hi - lo << " max_rise=" << worst_rise;
  o.require(std::abs(d50 - 0.615) <= 0.02, "D(50) in 0.615 +- 0.02");
  o.require(hi - lo <= 0.01, "flat within 0.01 for T >= 500");
  o.require(worst_rise <= 0.01, "no rise above 0.01");
}

void square_load(Outcome& o) {
  SolverConfig cfg;
  cfg.kind = SolverKind::kHybrid;
  auto norm = [&](Count T) {
    const auto p = square_params(T);
    const auto solved = solve(p, cfg);
    return exhaustive_load(StorageDesign(p, solved.assignment)) / load_mds(p).load;
  };
  Count exact = 0;
  for (Count T : square_partitions(1, 250)) {
    const auto v = norm(T);
    if (v == 1) ++exact;
    o.require(v == 1, "L_norm = 1 at T=" + std::to_string(T));
  }
  const auto big = norm(3000);
  o.detail << "exact_ones=" << exact << "/" << square_partitions(1, 250).size()
           << " L_norm(3000)=" << to_double(big);
  o.require(big >= 1 && big <= Rational(115, 100), "L_norm(3000) in [1, 1.15]");
}

// Tiny instances: K <= 4, T in {2, 3}, chosen by a seeded draw.
std::vector<SystemParameters> tiny_instances(Count count) {
  std::vector<SystemParameters> pool;
  for (const auto& s : all_shapes(4)) {
    if (s.per_batch == s.servers) continue;
    for (Count T : {2, 3}) {
      try {
        const auto p = shape_params(s, T);
        if (p.batch_count * p.partitions <= 12 && p.rows_per_partition <= 6) pool.push_back(p);
      } catch (const std::exception&) {
      }
    }
  }
  Rng rng(2024);
  std::vector<SystemParameters> out;
  for (Count i = 0; i < count; ++i) out.push_back(pool[uniform_below(rng, pool.size())]);
  return out;
}

void exact_solver_oracle(Outcome& o) {
  Count checked = 0, matched = 0, fewer = 0;
  std::set<std::string> distinct;
  for (const auto& p : tiny_instances(24)) {
    distinct.insert(format_parameters(p.raw()) + " T=" + std::to_string(p.partitions));
    const AssignmentMatrix empty(p.batch_count, p.partitions);
    BranchAndBoundOptions off;
    off.bounding = false;
    const auto with = branch_and_bound_assign(p, empty);
    const auto without = branch_and_bound_assign(p, empty, off);
    const auto ex = exhaustive_assign(p);
    ++checked;
    if (with.objective == ex.objective) ++matched;
    if (with.nodes <= without.nodes) ++fewer;
  }
  o.detail << "instances=" << checked << " distinct=" << distinct.size() << " optimum_matches=" << matched << " node_count_ok=" << fewer;
  o.require(checked >= 20, "at least 20 instances");
  o.require(matched == checked, "branch and bound equals exhaustive optimum");
  o.require(fewer == checked, "bounding never adds nodes");
}

void simulation_equivalence(Outcome& o) {
  Count mismatches = 0, sets = 0, designs = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    for (Count T : {1, 5}) {
      const auto design = random_k6_design(T, seed);
      const auto cv = cross_validate(design, EvaluationMode::exhaustive());
      mismatches += cv.unicast_mismatches;
      sets += cv.sets_checked;
      ++designs;
      if (T == 1) {
        const auto& p = design.params();
        const auto mds = load_mds(p);
        Rational sum = 0;
        const auto all = all_finisher_sets(p.servers, p.finishers);
        for (ServerMask q : all) {
          const auto trace = simulate_shuffle(design, q, mds.threshold);
          sum += trace.load;
          o.require(trace.rounding_slack == 0, "no rounding slack at T=1");
        }
        o.require(sum / Rational(static_cast<long long>(all.size())) == mds.load,
                  "T=1 average load equals load_mds, seed " + std::to_string(seed));
      }
    }
  }
  o.detail << "designs=" << designs << " set_checks=" << sets << " unicast_mismatches=" << mismatches;
  o.require(mismatches == 0, "simulator unicasts equal remaining_unicasts");
}

void cache_soundness(Outcome& o) {
  const auto p = small_params();
  Rng rng(7);
  AssignmentMatrix m(p.batch_count, p.partitions);
  UnicastCache cache(p, min_multicast_size(p));
  struct Step {
    Count b, t, delta;
  };
  std::vector<Step> done;
  Count steps = 0, bad = 0, undos = 0;
  for (; steps < 1000; ++steps) {
    if (!done.empty() && uniform_below(rng, 4) == 0) {
      cache.undo();
      m.at(done.back().b, done.back().t) -= done.back().delta;
      done.pop_back();
      ++undos;
    } else {
      const Count b = static_cast<Count>(uniform_below(rng, static_cast<std::uint64_t>(p.batch_count)));
      const Count t = static_cast<Count>(uniform_below(rng, static_cast<std::uint64_t>(p.partitions)));
      const Count delta = (m.at(b, t) > 0 && uniform_below(rng, 3) == 0) ? -1 : 1;
      m.at(b, t) += delta;
      cache.apply(b, t, delta);
      done.push_back({b, t, delta});
    }
    const UnicastCache fresh(p, m, cache.threshold());
    if (!cache.same_state(fresh) || cache.objective() != fresh.objective() ||
        cache.units() != total_oracle(p, m, cache.threshold()))
      ++bad;
  }
  o.detail << "steps=" << steps << " undos=" << undos << " mismatches=" << bad;
  o.require(bad == 0, "cache equals recomputation at every step");
}

void rational_identities(Outcome& o) {
  Count shapes = 0, bad_alpha = 0, bad_load = 0;
  for (const auto& s : all_shapes(10)) {
    const auto p = shape_params(s);
    ++shapes;
    Rational sum = 0;
    for (Count j = 0; j <= p.servers_per_batch; ++j) {
      if (alpha(j, p) != alpha_oracle(j, s.servers, s.finishers, s.per_batch)) ++bad_alpha;
      sum += alpha(j, p);
    }
    if (sum * Rational(p.finishers, p.servers) * p.batch_count !=
        Rational(binomial(p.servers - 1, p.servers_per_batch)))
      ++bad_alpha;
    if (load_mds(p).load != load_oracle(s.servers, s.finishers, s.per_batch)) ++bad_load;
  }
  o.detail << "shapes=" << shapes << " alpha_failures=" << bad_alpha << " load_failures=" << bad_load;
  o.require(bad_alpha == 0, "alpha identity");
  o.require(bad_load == 0, "load_mds brute force");
}

void server_scaling(Outcome& o) {
  SweepSpec spec;
  spec.variable = SweepSpec::Variable::kServers;
  spec.values = {6, 9, 12, 15};
  spec.mode = EvaluationMode::sampled(1000, 0);
  const auto rows = run_sweep(spec);
  double prev = 1e300;
  bool monotone = true;
  for (const auto& r : rows) {
    o.detail << " K=" << r.value << ":D_norm=" << r.delay_norm;
    o.require(r.valid, "heuristic valid at K=" + std::to_string(r.value));
    monotone = monotone && r.delay_norm < prev;
    prev = r.delay_norm;
  }
  o.require(monotone, "D_norm decreasing in K");

  SweepSpec small = spec;
  small.values = {6};
  small.random_samples = 100;
  const auto pair = run_sweep(small);
  o.detail << " K=6:L_heuristic=" << pair[0].load << ",L_random_mean=" << pair[1].load;
  o.require(pair[0].load <= pair[1].load, "heuristic load <= random mean at K=6");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {
      {1, "small example end to end", 1, example_end_to_end},
      {2, "lossless partitioning regression", 60, lossless_partitioning},
      {3, "square system delay curve", 60, square_delay},
      {4, "square system load curve", 1800, square_load},
      {5, "exact solver oracle", 600, exact_solver_oracle},
      {6, "analytic and simulated shuffle agree", 600, simulation_equivalence},
      {7, "cache soundness", 600, cache_soundness},
      {8, "rational identities", 600, rational_identities},
      {9, "server scaling", 600, server_scaling},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << ']';
    }
    const double secs = since(start);
    if (secs > c.budget_seconds) o.require(false, "over time budget");
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ", "
              << secs << " s): " << o.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

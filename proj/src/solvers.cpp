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

#include "bdcode/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bdcode/evaluation.hpp"
#include "bdcode/model.hpp"
#include "bdcode/random.hpp"

namespace bdcode {

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kHeuristic: return "heuristic";
    case SolverKind::kBranchAndBound: return "bnb";
    case SolverKind::kHybrid: return "hybrid";
    case SolverKind::kRandom: return "random";
    case SolverKind::kExhaustive: return "exhaustive";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& text) {
  if (text == "heuristic") return SolverKind::kHeuristic;
  if (text == "bnb" || text == "branch_and_bound") return SolverKind::kBranchAndBound;
  if (text == "hybrid") return SolverKind::kHybrid;
  if (text == "random") return SolverKind::kRandom;
  if (text == "exhaustive") return SolverKind::kExhaustive;
  throw std::invalid_argument("unknown solver '" + text + "'");
}

Count default_decrement_count(const SystemParameters& p) {
  // One batch worth of rows, capped so a re-completion stays enumerable.
  return std::min<Count>(p.batch_size, 4);
}

Rational default_hybrid_threshold(const SystemParameters& p) {
  return Rational(1) /
         (Rational(p.source_rows) * p.vectors * binomial(p.servers, p.finishers));
}

namespace {

Count to_count(const Rational& value) {
  if (denominator(value) != 1) throw std::logic_error("expected an integer key");
  return numerator(value).convert_to<Count>();
}

boost::multiprecision::cpp_int lcm_int(const boost::multiprecision::cpp_int& a,
                                       const boost::multiprecision::cpp_int& b) {
  return a / boost::multiprecision::gcd(a, b) * b;
}

}  // namespace

AssignmentObjective::AssignmentObjective(const SystemParameters& params,
                                         const AssignmentMatrix& partial) {
  const Count s_q = min_multicast_size(params);
  std::vector<Count> thresholds{s_q};
  if (s_q - 1 >= 1) thresholds.push_back(s_q - 1);

  // load_s = multicast_s + units_s / (q m |Q|)
  const Count sets = binomial(params.servers, params.finishers);
  const Count base = checked_mul(checked_mul(params.finishers, params.source_rows), sets);
  std::vector<Rational> scaled;
  boost::multiprecision::cpp_int den = 1;
  for (Count s : thresholds) {
    scaled.push_back(multicast_load(params, s) * base);
    den = lcm_int(den, denominator(scaled.back()));
  }
  unit_weight_ = den.convert_to<Count>();
  for (const auto& x : scaled) offsets_.push_back(to_count(x * unit_weight_));
  key_scale_ = Rational(checked_mul(base, unit_weight_));
  for (Count s : thresholds) caches_.emplace_back(params, partial, s);
}

void AssignmentObjective::apply(Count batch, Count partition, Count delta) {
  for (auto& c : caches_) c.apply(batch, partition, delta);
}

void AssignmentObjective::undo() {
  for (auto& c : caches_) c.undo();
}

void AssignmentObjective::commit() {
  for (auto& c : caches_) c.commit();
}

Count AssignmentObjective::key() const {
  Count best = std::numeric_limits<Count>::max();
  for (std::size_t i = 0; i < caches_.size(); ++i) {
    best = std::min(best, offsets_[i] + unit_weight_ * caches_[i].units());
  }
  return best;
}

Count AssignmentObjective::lower_bound(const std::vector<Count>& remaining_per_batch) const {
  Count best = std::numeric_limits<Count>::max();
  for (std::size_t i = 0; i < caches_.size(); ++i) {
    // Each row placed in batch b lowers at most one partition deficit of
    // every nonzero pair indexed by b, by one.
    Count reducible = 0;
    for (std::size_t b = 0; b < remaining_per_batch.size(); ++b) {
      if (remaining_per_batch[b] > 0) {
        reducible += remaining_per_batch[b] * caches_[i].nonzero_pairs(static_cast<Count>(b));
      }
    }
    const Count floor_units = std::max<Count>(0, caches_[i].units() - reducible);
    best = std::min(best, offsets_[i] + unit_weight_ * floor_units);
  }
  return best;
}

Rational AssignmentObjective::to_load(Count key) const { return Rational(key) / key_scale_; }

HeuristicResult heuristic_assign(const SystemParameters& p) {
  const Count batches = p.batch_count;
  const Count T = p.partitions;
  const Count fill = p.coded_rows / (batches * T);
  const Count extra = p.batch_size - fill * T;  // rows each batch still needs
  HeuristicResult out{AssignmentMatrix(batches, T, fill), {}};
  if (extra > 0) {
    for (Count a = 0; a < extra * batches; ++a) {
      ++out.matrix.at(a / extra, a % T);
    }
  }
  out.violations = validate_assignment(p, out.matrix);
  return out;
}

void check_partial(const SystemParameters& p, const AssignmentMatrix& partial) {
  if (partial.batches() != p.batch_count || partial.partitions() != p.partitions) {
    throw std::invalid_argument("partial assignment has the wrong shape");
  }
  for (Count v : partial.data()) {
    if (v < 0) throw std::invalid_argument("partial assignment has a negative entry");
  }
  for (Count b = 0; b < p.batch_count; ++b) {
    if (partial.row_sum(b) > p.batch_size) {
      throw std::invalid_argument("batch " + std::to_string(b + 1) + " already exceeds the batch size");
    }
  }
  for (Count t = 0; t < p.partitions; ++t) {
    if (partial.column_sum(t) > p.rows_per_partition) {
      throw std::invalid_argument("partition " + std::to_string(t + 1) +
                                  " already exceeds its rows per partition");
    }
  }
}

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const SystemParameters& p, const AssignmentMatrix& start,
                 AssignmentObjective& objective, const BranchAndBoundOptions& options)
      : p_(p), objective_(objective), options_(options), current_(start) {
    row_remaining_.resize(static_cast<std::size_t>(p.batch_count));
    col_remaining_.resize(static_cast<std::size_t>(p.partitions));
    for (Count b = 0; b < p.batch_count; ++b) {
      row_remaining_[static_cast<std::size_t>(b)] = p.batch_size - start.row_sum(b);
    }
    for (Count t = 0; t < p.partitions; ++t) {
      col_remaining_[static_cast<std::size_t>(t)] = p.rows_per_partition - start.column_sum(t);
    }
  }

  BranchAndBoundResult run() {
    if (options_.incumbent) seed_incumbent(*options_.incumbent);
    dfs(0);
    if (!have_best_) throw std::logic_error("branch and bound found no completion");
    BranchAndBoundResult r;
    r.assignment = best_;
    r.objective = objective_.to_load(best_key_);
    r.nodes = nodes_;
    r.prunes = prunes_;
    r.leaves = leaves_;
    r.exhausted = !aborted_;
    return r;
  }

 private:
  void seed_incumbent(const AssignmentMatrix& incumbent) {
    if (!validate_assignment(p_, incumbent).empty()) {
      throw std::invalid_argument("incumbent is not a valid assignment");
    }
    std::size_t applied = 0;
    for (Count b = 0; b < p_.batch_count; ++b) {
      for (Count t = 0; t < p_.partitions; ++t) {
        const Count diff = incumbent.at(b, t) - current_.at(b, t);
        if (diff < 0) throw std::invalid_argument("incumbent does not extend the start matrix");
        if (diff > 0) {
          objective_.apply(b, t, diff);
          ++applied;
        }
      }
    }
    best_key_ = objective_.key();
    for (std::size_t i = 0; i < applied; ++i) objective_.undo();
    best_ = incumbent;
    have_best_ = true;
  }

  void leaf() {
    ++leaves_;
    const Count key = objective_.key();
    if (!have_best_ || key < best_key_) {
      best_key_ = key;
      best_ = current_;
      have_best_ = true;
      dfs_found_ = true;
    } else if (key == best_key_ && !dfs_found_) {
      // Leaves arrive in row-major lexicographic order, so only the first
      // tie can beat an externally supplied incumbent.
      if (current_ < best_) best_ = current_;
      dfs_found_ = true;
    }
  }

  void dfs(Count from) {
    if (aborted_) return;
    Count batch = from;
    while (batch < p_.batch_count && row_remaining_[static_cast<std::size_t>(batch)] == 0) ++batch;
    if (batch == p_.batch_count) {
      leaf();
      return;
    }
    ++nodes_;
    if (options_.node_limit > 0 && nodes_ > options_.node_limit && have_best_) {
      aborted_ = true;
      return;
    }
    if (options_.bounding && have_best_) {
      const Count lb = objective_.lower_bound(row_remaining_);
      if (lb > best_key_ || (lb == best_key_ && dfs_found_)) {
        ++prunes_;
        return;
      }
    }
    std::vector<Count> candidates;
    for (Count t = 0; t < p_.partitions; ++t) {
      if (col_remaining_[static_cast<std::size_t>(t)] > 0) candidates.push_back(t);
    }
    std::vector<Count> suffix(candidates.size() + 1, 0);
    for (std::size_t k = candidates.size(); k-- > 0;) {
      suffix[k] = suffix[k + 1] + col_remaining_[static_cast<std::size_t>(candidates[k])];
    }
    fill(batch, candidates, suffix, 0);
  }

  // Enumerates the rest of row `batch` in increasing lexicographic order.
  void fill(Count batch, const std::vector<Count>& candidates, const std::vector<Count>& suffix,
            std::size_t k) {
    if (aborted_) return;
    Count& row_left = row_remaining_[static_cast<std::size_t>(batch)];
    if (row_left == 0) {
      dfs(batch + 1);
      return;
    }
    if (k == candidates.size() || suffix[k] < row_left) return;
    const Count t = candidates[k];
    Count& col_left = col_remaining_[static_cast<std::size_t>(t)];
    const Count most = std::min(row_left, col_left);
    Count placed = 0;
    for (Count c = 0; c <= most; ++c) {
      if (c > 0) {
        ++current_.at(batch, t);
        --row_left;
        --col_left;
        objective_.apply(batch, t, 1);
        ++placed;
      }
      if (suffix[k + 1] >= row_left) fill(batch, candidates, suffix, k + 1);
      if (aborted_) break;
    }
    for (; placed > 0; --placed) {
      objective_.undo();
      --current_.at(batch, t);
      ++row_left;
      ++col_left;
    }
  }

  const SystemParameters& p_;
  AssignmentObjective& objective_;
  BranchAndBoundOptions options_;
  AssignmentMatrix current_;
  std::vector<Count> row_remaining_;
  std::vector<Count> col_remaining_;
  AssignmentMatrix best_;
  Count best_key_ = 0;
  bool have_best_ = false;
  bool dfs_found_ = false;
  bool aborted_ = false;
  Count nodes_ = 0;
  Count prunes_ = 0;
  Count leaves_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

BranchAndBoundResult branch_and_bound_assign(const SystemParameters& p,
                                             const AssignmentMatrix& start,
                                             AssignmentObjective& objective,
                                             const BranchAndBoundOptions& options) {
  check_partial(p, start);
  return BranchAndBound(p, start, objective, options).run();
}

BranchAndBoundResult branch_and_bound_assign(const SystemParameters& p,
                                             const AssignmentMatrix& start,
                                             const BranchAndBoundOptions& options) {
  check_partial(p, start);
  AssignmentObjective objective(p, start);
  return BranchAndBound(p, start, objective, options).run();
}

AssignmentMatrix random_assign(const SystemParameters& p, std::uint64_t seed) {
  std::vector<std::int32_t> tokens;
  tokens.reserve(static_cast<std::size_t>(p.coded_rows));
  for (Count t = 0; t < p.partitions; ++t) {
    tokens.insert(tokens.end(), static_cast<std::size_t>(p.rows_per_partition),
                  static_cast<std::int32_t>(t));
  }
  Rng rng(seed);
  fisher_yates(rng, tokens);
  // The dealt multiset is exactly r/T of each partition, so both sum
  // conditions hold by construction and no deal is ever rejected.
  AssignmentMatrix out(p.batch_count, p.partitions);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++out.at(static_cast<Count>(i) / p.batch_size, tokens[i]);
  }
  return out;
}

namespace {

class Enumerator {
 public:
  Enumerator(const SystemParameters& p, Count limit) : p_(p), limit_(limit), current_(p.batch_count, p.partitions) {
    col_remaining_.assign(static_cast<std::size_t>(p.partitions), p.rows_per_partition);
  }

  ExhaustiveResult run() {
    // Recursion depth is one frame per matrix cell.
    if (p_.batch_count * p_.partitions > kMaxCells) {
      throw std::length_error("exhaustive_assign: instance exceeds the enumeration limit");
    }
    row(0, 0, p_.batch_size);
    ExhaustiveResult r;
    r.assignment = best_;
    r.objective = best_value_;
    r.visited = visited_;
    return r;
  }

 private:
  void row(Count batch, Count t, Count left) {
    // Dead ends count too, or huge instances would never reach the limit.
    if (++nodes_ > kNodesPerLeaf * limit_) {
      throw std::length_error("exhaustive_assign: instance exceeds the enumeration limit");
    }
    if (batch == p_.batch_count) {
      if (++visited_ > limit_) {
        throw std::length_error("exhaustive_assign: instance exceeds the enumeration limit");
      }
      const StorageDesign design(p_, current_);
      const Rational value =
          load_bdc(design, EvaluationMode::exhaustive(), Backend::kSerial).load;
      if (!have_best_ || value < best_value_) {
        best_value_ = value;
        best_ = current_;
        have_best_ = true;
      }
      return;
    }
    if (t == p_.partitions - 1) {
      Count& col = col_remaining_[static_cast<std::size_t>(t)];
      if (left > col) return;
      current_.at(batch, t) = left;
      col -= left;
      row(batch + 1, 0, p_.batch_size);
      col += left;
      current_.at(batch, t) = 0;
      return;
    }
    Count room = 0;
    for (Count u = t; u < p_.partitions; ++u) room += col_remaining_[static_cast<std::size_t>(u)];
    if (left > room) return;
    Count& col = col_remaining_[static_cast<std::size_t>(t)];
    for (Count c = 0; c <= std::min(left, col); ++c) {
      current_.at(batch, t) = c;
      col -= c;
      row(batch, t + 1, left - c);
      col += c;
    }
    current_.at(batch, t) = 0;
  }

  static constexpr Count kNodesPerLeaf = 64;
  static constexpr Count kMaxCells = 10000;
  const SystemParameters& p_;
  Count limit_;
  Count nodes_ = 0;
  AssignmentMatrix current_;
  std::vector<Count> col_remaining_;
  AssignmentMatrix best_;
  Rational best_value_;
  bool have_best_ = false;
  Count visited_ = 0;
};

}  // namespace

ExhaustiveResult exhaustive_assign(const SystemParameters& p, Count limit) {
  return Enumerator(p, limit).run();
}

std::string SolverLog::to_key_value() const {
  std::ostringstream os;
  os << "solver=" << solver << '\n'
     << "seed=" << seed << '\n'
     << "iterations=" << iterations << '\n'
     << "nodes=" << nodes << '\n'
     << "prunes=" << prunes << '\n'
     << "wall_seconds=" << wall_seconds << '\n'
     << "objective=" << objective.convert_to<double>() << '\n'
     << "objective_exact=" << format_rational(objective) << '\n'
     << "valid=" << (valid ? "true" : "false") << '\n';
  if (!note.empty()) os << "note=" << note << '\n';
  return os.str();
}

SolverResult hybrid_assign(const SystemParameters& p, const SolverConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  if (config.window < 1) throw std::invalid_argument("hybrid window must be positive");
  const Rational threshold = config.threshold.value_or(default_hybrid_threshold(p));
  if (threshold <= 0) throw std::invalid_argument("hybrid threshold must be positive");
  if (config.decrement_count < 0) throw std::invalid_argument("hybrid decrement count must be positive");
  const Count decrements = config.decrement_count > 0 ? config.decrement_count : default_decrement_count(p);

  SolverResult out;
  out.log.solver = to_string(SolverKind::kHybrid);
  out.log.seed = config.seed;

  HeuristicResult start = heuristic_assign(p);
  AssignmentMatrix current = start.matrix;
  if (!start.valid()) {
    current = random_assign(p, config.seed);
    out.log.note = "heuristic matrix invalid; seeded from random_assign";
  }
  AssignmentObjective objective(p, current);
  Count key = objective.key();
  out.log.history.push_back(objective.to_load(key));

  Rng rng(config.seed);
  const Rational window_floor = threshold * objective.key_scale() * config.window;
  std::deque<Count> window;
  Count window_sum = 0;
  std::vector<std::pair<Count, Count>> nonzero;

  for (Count iter = 0;; ++iter) {
    if (config.max_iterations > 0 && iter >= config.max_iterations) break;
    if (config.time_budget_seconds > 0.0 && seconds_since(started) >= config.time_budget_seconds) break;

    nonzero.clear();
    for (Count b = 0; b < p.batch_count; ++b) {
      for (Count t = 0; t < p.partitions; ++t) {
        if (current.at(b, t) > 0) nonzero.emplace_back(b, t);
      }
    }
    const Count picks = std::min<Count>(decrements, static_cast<Count>(nonzero.size()));
    // Partial Fisher-Yates: the first `picks` slots become a uniform sample.
    for (Count i = 0; i < picks; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(uniform_below(rng, nonzero.size() - static_cast<std::size_t>(i)));
      std::swap(nonzero[static_cast<std::size_t>(i)], nonzero[j]);
    }
    const AssignmentMatrix previous = current;
    std::vector<Count> touched;
    for (Count i = 0; i < picks; ++i) {
      const auto [b, t] = nonzero[static_cast<std::size_t>(i)];
      --current.at(b, t);
      objective.apply(b, t, -1);
      touched.push_back(b);
    }
    objective.commit();
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    BranchAndBoundOptions options;
    options.incumbent = previous;
    options.node_limit = config.node_limit;
    const BranchAndBoundResult res = branch_and_bound_assign(p, current, objective, options);
    out.log.nodes += res.nodes;
    out.log.prunes += res.prunes;
    for (Count b : touched) {
      for (Count t = 0; t < p.partitions; ++t) {
        const Count diff = res.assignment.at(b, t) - current.at(b, t);
        if (diff != 0) objective.apply(b, t, diff);
      }
    }
    objective.commit();
    current = res.assignment;

    const Count next = objective.key();
    const Count improvement = key - next;
    key = next;
    out.log.iterations = iter + 1;
    out.log.history.push_back(objective.to_load(key));

    window.push_back(improvement);
    window_sum += improvement;
    if (static_cast<Count>(window.size()) > config.window) {
      window_sum -= window.front();
      window.pop_front();
    }
    if (static_cast<Count>(window.size()) == config.window && Rational(window_sum) < window_floor) break;
  }

  out.assignment = std::move(current);
  out.log.objective = objective.to_load(key);
  out.log.valid = validate_assignment(p, out.assignment).empty();
  out.log.wall_seconds = seconds_since(started);
  return out;
}

SolverResult solve(const SystemParameters& p, const SolverConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  SolverResult out;
  out.log.solver = to_string(config.kind);
  out.log.seed = config.seed;

  auto score = [&](const AssignmentMatrix& m) {
    return AssignmentObjective(p, m).value();
  };

  switch (config.kind) {
    case SolverKind::kHeuristic: {
      HeuristicResult h = heuristic_assign(p);
      out.assignment = std::move(h.matrix);
      out.log.valid = h.valid();
      if (out.log.valid) {
        out.log.objective = score(out.assignment);
      } else {
        out.log.note = "heuristic matrix violates the sum conditions";
      }
      break;
    }
    case SolverKind::kBranchAndBound: {
      BranchAndBoundOptions options;
      options.node_limit = config.node_limit;
      HeuristicResult h = heuristic_assign(p);
      if (h.valid()) options.incumbent = h.matrix;
      const BranchAndBoundResult r =
          branch_and_bound_assign(p, AssignmentMatrix(p.batch_count, p.partitions), options);
      out.assignment = r.assignment;
      out.log.objective = r.objective;
      out.log.nodes = r.nodes;
      out.log.prunes = r.prunes;
      if (!r.exhausted) out.log.note = "node limit reached; result may be suboptimal";
      break;
    }
    case SolverKind::kHybrid:
      return hybrid_assign(p, config);
    case SolverKind::kRandom:
      out.assignment = random_assign(p, config.seed);
      out.log.objective = score(out.assignment);
      break;
    case SolverKind::kExhaustive: {
      ExhaustiveResult r = exhaustive_assign(p, config.exhaustive_limit);
      out.assignment = std::move(r.assignment);
      out.log.objective = r.objective;
      out.log.iterations = r.visited;
      break;
    }
  }
  out.log.wall_seconds = seconds_since(started);
  return out;
}

}  // namespace bdcode

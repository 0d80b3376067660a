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

#include "bdcode/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bdcode/random.hpp"

namespace bdcode {

EvaluationMode EvaluationMode::sampled(Count samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sampled mode requires at least one sample");
  return EvaluationMode{Kind::kSampled, samples, seed};
}

EvaluationMode EvaluationMode::parse(const std::string& text, std::uint64_t seed) {
  if (text == "exhaustive") return exhaustive();
  const std::string prefix = "sampled:";
  if (text.rfind(prefix, 0) == 0) {
    Count n = 0;
    try {
      std::size_t used = 0;
      n = std::stoll(text.substr(prefix.size()), &used);
      if (used != text.size() - prefix.size()) throw std::invalid_argument(text);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad sample count in mode '" + text + "'");
    }
    return sampled(n, seed);
  }
  throw std::invalid_argument("mode must be 'exhaustive' or 'sampled:N', got '" + text + "'");
}

std::string EvaluationMode::describe() const {
  if (kind == Kind::kExhaustive) return "exhaustive";
  return "sampled:" + std::to_string(samples);
}

std::vector<ServerMask> all_finisher_sets(Count servers, Count finishers) {
  std::vector<ServerMask> out;
  for (const auto& label : enumerate_batch_labels(servers, finishers)) out.push_back(label.mask());
  return out;
}

std::vector<std::vector<Count>> sample_permutations(Count servers, Count count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<Count>> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<Count> base(static_cast<std::size_t>(servers));
  std::iota(base.begin(), base.end(), Count{1});
  for (Count i = 0; i < count; ++i) {
    auto perm = base;
    fisher_yates(rng, perm);
    out.push_back(std::move(perm));
  }
  return out;
}

ServerMask prefix_mask(const std::vector<Count>& order, Count length) {
  ServerMask mask = 0;
  for (Count i = 0; i < length; ++i) mask |= ServerMask{1} << (order[static_cast<std::size_t>(i)] - 1);
  return mask;
}

std::vector<ServerMask> finisher_sets(const SystemParameters& p, const EvaluationMode& mode) {
  if (mode.kind == EvaluationMode::Kind::kExhaustive) {
    if (binomial(p.servers, p.finishers) > kExhaustiveSetLimit) {
      throw std::invalid_argument("C(K, q) = " + std::to_string(binomial(p.servers, p.finishers)) +
                                  " finisher sets exceeds the exhaustive limit; use sampled mode");
    }
    return all_finisher_sets(p.servers, p.finishers);
  }
  std::vector<ServerMask> out;
  for (const auto& perm : sample_permutations(p.servers, mode.samples, mode.seed)) {
    out.push_back(prefix_mask(perm, p.finishers));
  }
  return out;
}

namespace {

// Sparse view of a design for the parallel kernels.
struct DesignView {
  const SystemParameters& params;
  std::vector<ServerMask> masks;
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> rows;  // (partition, count)

  explicit DesignView(const StorageDesign& design) : params(design.params()) {
    const auto& P = design.assignment();
    masks.reserve(static_cast<std::size_t>(P.batches()));
    rows.resize(static_cast<std::size_t>(P.batches()));
    for (Count b = 0; b < P.batches(); ++b) {
      masks.push_back(design.label_mask(b));
      for (Count t = 0; t < P.partitions(); ++t) {
        if (P.at(b, t) != 0) {
          rows[static_cast<std::size_t>(b)].emplace_back(static_cast<std::int32_t>(t),
                                                         static_cast<std::int32_t>(P.at(b, t)));
        }
      }
    }
  }
};

void check_threshold(const SystemParameters& p, Count threshold) {
  if (threshold < 1 || threshold > p.servers_per_batch + 1) {
    throw std::invalid_argument("multicast threshold must lie in 1..mu*q+1");
  }
}

// Deficit units (per responsible vector) summed over the finishers of one set.
Count set_deficits_sparse(const DesignView& view, ServerMask finishers, Count threshold,
                          std::vector<Count>& base, std::vector<Count>& cov) {
  const Count T = view.params.partitions;
  const Count need = view.params.decode_threshold;
  std::fill(base.begin(), base.end(), 0);
  // Batches shared by at least `threshold` finishers reach every finisher,
  // either locally or through multicast.
  for (std::size_t b = 0; b < view.masks.size(); ++b) {
    if (mask_size(view.masks[b] & finishers) >= threshold) {
      for (auto [t, c] : view.rows[b]) base[static_cast<std::size_t>(t)] += c;
    }
  }
  Count total = 0;
  for (ServerMask rest = finishers; rest != 0; rest &= rest - 1) {
    const ServerMask self = rest & (~rest + 1);
    std::copy(base.begin(), base.end(), cov.begin());
    for (std::size_t b = 0; b < view.masks.size(); ++b) {
      if ((view.masks[b] & self) && mask_size(view.masks[b] & finishers) < threshold) {
        for (auto [t, c] : view.rows[b]) cov[static_cast<std::size_t>(t)] += c;
      }
    }
    for (Count t = 0; t < T; ++t) {
      const Count have = cov[static_cast<std::size_t>(t)];
      if (have < need) total += need - have;
    }
  }
  return total;
}

// Straight transcription of the definition; kept as the test reference.
Count set_deficits_serial(const StorageDesign& design, ServerMask finishers, Count threshold) {
  const auto& p = design.params();
  const auto& P = design.assignment();
  Count total = 0;
  for (Count server : mask_servers(finishers)) {
    for (Count t = 0; t < p.partitions; ++t) {
      Count local = 0;
      Count received = 0;
      for (Count b = 0; b < p.batch_count; ++b) {
        const ServerMask label = design.label_mask(b);
        if (mask_contains(label, server)) {
          local += P.at(b, t);
        } else if (mask_size(label & finishers) >= threshold) {
          received += P.at(b, t);
        }
      }
      total += std::max<Count>(0, p.decode_threshold - local - received);
    }
  }
  return total;
}

bool decodable_sparse(const DesignView& view, ServerMask servers, std::vector<Count>& missing) {
  // Partition t is lost if the batches no chosen server stores hold more than
  // its r/T - m/T spare rows.
  const Count spare = view.params.rows_per_partition - view.params.decode_threshold;
  std::fill(missing.begin(), missing.end(), 0);
  for (std::size_t b = 0; b < view.masks.size(); ++b) {
    if ((view.masks[b] & servers) == 0) {
      for (auto [t, c] : view.rows[b]) {
        missing[static_cast<std::size_t>(t)] += c;
        if (missing[static_cast<std::size_t>(t)] > spare) return false;
      }
    }
  }
  return true;
}

bool decodable_serial(const StorageDesign& design, ServerMask servers) {
  const auto& p = design.params();
  const auto& P = design.assignment();
  for (Count t = 0; t < p.partitions; ++t) {
    Count have = 0;
    for (Count b = 0; b < p.batch_count; ++b) {
      if (design.label_mask(b) & servers) have += P.at(b, t);
    }
    if (have < p.decode_threshold) return false;
  }
  return true;
}

void check_permutation(const std::vector<Count>& order, Count servers) {
  if (static_cast<Count>(order.size()) != servers) {
    throw std::invalid_argument("finish order must list every server exactly once");
  }
  ServerMask seen = 0;
  for (Count s : order) {
    if (s < 1 || s > servers || mask_contains(seen, s)) {
      throw std::invalid_argument("finish order must be a permutation of 1..K");
    }
    seen |= ServerMask{1} << (s - 1);
  }
}

}  // namespace

UnicastTally remaining_unicasts(const StorageDesign& design, ServerMask finishers, Count threshold) {
  const auto& p = design.params();
  check_threshold(p, threshold);
  if (mask_size(finishers) != p.finishers || (finishers >> p.servers) != 0) {
    throw std::invalid_argument("finisher set must contain exactly q servers from 1..K");
  }
  UnicastTally tally;
  tally.servers = mask_servers(finishers);
  const auto& P = design.assignment();
  for (Count server : tally.servers) {
    Count deficit = 0;
    for (Count t = 0; t < p.partitions; ++t) {
      Count have = 0;
      for (Count b = 0; b < p.batch_count; ++b) {
        const ServerMask label = design.label_mask(b);
        if (mask_contains(label, server) || mask_size(label & finishers) >= threshold) {
          have += P.at(b, t);
        }
      }
      deficit += std::max<Count>(0, p.decode_threshold - have);
    }
    Count units = checked_mul(deficit, p.vectors_per_finisher);
    tally.units.push_back(units);
    tally.total += units;
  }
  return tally;
}

std::vector<Count> unicast_totals(const StorageDesign& design, const std::vector<ServerMask>& sets,
                                  Count threshold, Backend backend) {
  const auto& p = design.params();
  check_threshold(p, threshold);
  std::vector<Count> out(sets.size(), 0);
  const Count n = static_cast<Count>(sets.size());
  if (backend == Backend::kSerial) {
    for (Count i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          set_deficits_serial(design, sets[static_cast<std::size_t>(i)], threshold) *
          p.vectors_per_finisher;
    }
    return out;
  }
  const DesignView view(design);
#pragma omp parallel
  {
    std::vector<Count> base(static_cast<std::size_t>(p.partitions));
    std::vector<Count> cov(static_cast<std::size_t>(p.partitions));
#pragma omp for schedule(static)
    for (Count i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          set_deficits_sparse(view, sets[static_cast<std::size_t>(i)], threshold, base, cov) *
          p.vectors_per_finisher;
    }
  }
  return out;
}

LoadResult load_bdc_over(const StorageDesign& design, const std::vector<ServerMask>& sets,
                         Backend backend) {
  const auto& p = design.params();
  if (sets.empty()) throw std::invalid_argument("load_bdc needs at least one finisher set");
  const Count s_q = min_multicast_size(p);
  std::vector<Count> thresholds{s_q};
  if (s_q - 1 >= 1) thresholds.push_back(s_q - 1);

  LoadResult result;
  result.sets = static_cast<Count>(sets.size());
  const Rational norm = Rational(p.source_rows) * p.vectors * result.sets;
  // Sampled sets repeat often when C(K, q) is small; each distinct set is
  // evaluated once and weighted by its multiplicity.
  std::vector<ServerMask> unique(sets);
  std::sort(unique.begin(), unique.end());
  std::vector<Count> weight;
  {
    std::vector<ServerMask> distinct;
    for (ServerMask m : unique) {
      if (!distinct.empty() && distinct.back() == m) {
        ++weight.back();
      } else {
        distinct.push_back(m);
        weight.push_back(1);
      }
    }
    unique = std::move(distinct);
  }
  for (Count s : thresholds) {
    auto totals = unicast_totals(design, unique, s, backend);
    Count sum = 0;
    for (std::size_t i = 0; i < totals.size(); ++i) sum = checked_add(sum, checked_mul(totals[i], weight[i]));
    result.strategies.push_back(StrategyLoad{s, multicast_load(p, s), Rational(sum) / norm});
  }
  result.load = result.strategies.front().total();
  result.threshold = result.strategies.front().threshold;
  for (const auto& st : result.strategies) {
    if (st.total() < result.load) {
      result.load = st.total();
      result.threshold = st.threshold;
    }
  }
  return result;
}

LoadResult load_bdc(const StorageDesign& design, const EvaluationMode& mode, Backend backend) {
  return load_bdc_over(design, finisher_sets(design.params(), mode), backend);
}

bool decodable(const StorageDesign& design, ServerMask servers) {
  return decodable_serial(design, servers);
}

Count completion_count(const StorageDesign& design, const std::vector<Count>& order) {
  const auto& p = design.params();
  check_permutation(order, p.servers);
  for (Count g = p.finishers; g <= p.servers; ++g) {
    if (decodable(design, prefix_mask(order, g))) return g;
  }
  throw std::logic_error("design not decodable from all servers");
}

GDistribution g_distribution(const StorageDesign& design, const EvaluationMode& mode,
                             Backend backend) {
  const auto& p = design.params();
  const Count K = p.servers;
  const Count q = p.finishers;
  GDistribution out;
  out.first = q;
  out.mass.assign(static_cast<std::size_t>(K - q + 1), Rational(0));

  if (mode.kind == EvaluationMode::Kind::kExhaustive) {
    if (K > 24) throw std::invalid_argument("exhaustive g distribution limited to K <= 24; use sampled mode");
    // A random permutation's first k servers form a uniform k-subset, and
    // decodability is monotone in the server set, so P(g <= k) is the
    // decodable fraction of k-subsets.
    const std::int64_t subsets = std::int64_t{1} << K;
    std::vector<Count> decodable_by_size(static_cast<std::size_t>(K + 1), 0);
    if (backend == Backend::kSerial) {
      for (std::int64_t mask = 0; mask < subsets; ++mask) {
        const int size = mask_size(static_cast<ServerMask>(mask));
        if (size >= q && decodable_serial(design, static_cast<ServerMask>(mask))) {
          ++decodable_by_size[static_cast<std::size_t>(size)];
        }
      }
    } else {
      const DesignView view(design);
      std::vector<std::vector<Count>> per_thread;
#pragma omp parallel
      {
        std::vector<Count> missing(static_cast<std::size_t>(p.partitions));
        std::vector<Count> local(static_cast<std::size_t>(K + 1), 0);
#pragma omp for schedule(static)
        for (std::int64_t mask = 0; mask < subsets; ++mask) {
          const int size = mask_size(static_cast<ServerMask>(mask));
          if (size >= q && decodable_sparse(view, static_cast<ServerMask>(mask), missing)) {
            ++local[static_cast<std::size_t>(size)];
          }
        }
        // Integer counts: the merge order cannot change the result.
#pragma omp critical
        for (std::size_t k = 0; k < local.size(); ++k) decodable_by_size[k] += local[k];
      }
    }
    Rational previous = 0;
    for (Count k = q; k <= K; ++k) {
      Rational cumulative(decodable_by_size[static_cast<std::size_t>(k)], binomial(K, k));
      out.mass[static_cast<std::size_t>(k - q)] = cumulative - previous;
      previous = cumulative;
    }
    return out;
  }

  const auto perms = sample_permutations(K, mode.samples, mode.seed);
  std::vector<Count> g_values(perms.size(), 0);
  const Count n = static_cast<Count>(perms.size());
  if (backend == Backend::kSerial) {
    for (Count i = 0; i < n; ++i) {
      g_values[static_cast<std::size_t>(i)] = completion_count(design, perms[static_cast<std::size_t>(i)]);
    }
  } else {
    const DesignView view(design);
#pragma omp parallel
    {
      std::vector<Count> missing(static_cast<std::size_t>(p.partitions));
#pragma omp for schedule(static)
      for (Count i = 0; i < n; ++i) {
        const auto& order = perms[static_cast<std::size_t>(i)];
        Count g = q;
        while (g < K && !decodable_sparse(view, prefix_mask(order, g), missing)) ++g;
        g_values[static_cast<std::size_t>(i)] = g;
      }
    }
  }
  std::vector<Count> histogram(static_cast<std::size_t>(K - q + 1), 0);
  for (Count g : g_values) ++histogram[static_cast<std::size_t>(g - q)];
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    out.mass[i] = Rational(histogram[i], n);
  }
  return out;
}

PerformanceReport evaluate_unpartitioned(const SystemParameters& p) {
  const SystemParameters base = p.partitions == 1 ? p : p.with_partitions(1);
  const MdsLoad mds = load_mds(base);
  PerformanceReport r;
  r.load = mds.load;
  r.threshold = mds.threshold;
  r.second_strategy = mds.threshold != min_multicast_size(base);
  r.multicast_load = multicast_load(base, mds.threshold);
  r.unicast_load = r.load - r.multicast_load;
  r.g = GDistribution::point_mass(base.finishers);
  r.map_delay = map_delay(base, r.g);
  r.reduce_delay = reduce_delay(base);
  r.delay = overall_delay(r.map_delay, r.reduce_delay);
  r.baseline_load = r.load;
  r.baseline_map_delay = r.map_delay;
  r.baseline_reduce_delay = r.reduce_delay;
  r.baseline_delay = r.delay;
  r.load_norm = 1;
  r.map_delay_norm = 1.0;
  r.reduce_delay_norm = 1.0;
  r.delay_norm = 1.0;
  return r;
}

PerformanceReport evaluate(const StorageDesign& design, const EvaluationMode& mode, Backend backend) {
  const auto& p = design.params();
  const PerformanceReport base = evaluate_unpartitioned(p);
  const LoadResult load = load_bdc(design, mode, backend);

  PerformanceReport r;
  r.mode = mode;
  r.sets = load.sets;
  r.load = load.load;
  r.threshold = load.threshold;
  r.second_strategy = load.threshold != load.strategies.front().threshold;
  for (const auto& st : load.strategies) {
    if (st.threshold == load.threshold) {
      r.multicast_load = st.multicast;
      r.unicast_load = st.unicast;
    }
  }
  r.g = g_distribution(design, mode, backend);
  r.map_delay = map_delay(p, r.g);
  r.reduce_delay = reduce_delay(p);
  r.delay = overall_delay(r.map_delay, r.reduce_delay);

  r.baseline_load = base.load;
  r.baseline_map_delay = base.map_delay;
  r.baseline_reduce_delay = base.reduce_delay;
  r.baseline_delay = base.delay;
  r.load_norm = base.load == 0 ? Rational(1) : r.load / base.load;
  r.map_delay_norm = r.map_delay / base.map_delay;
  r.reduce_delay_norm = base.reduce_delay == 0.0 ? 1.0 : r.reduce_delay / base.reduce_delay;
  r.delay_norm = r.delay / base.delay;
  return r;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string to_key_value(const PerformanceReport& r) {
  std::ostringstream os;
  os << "load=" << format_real(to_double(r.load)) << '\n'
     << "load_exact=" << format_rational(r.load) << '\n'
     << "strategy_threshold=" << r.threshold << '\n'
     << "strategy=" << (r.second_strategy ? "s_q-1" : "s_q") << '\n'
     << "multicast_load=" << format_rational(r.multicast_load) << '\n'
     << "unicast_load=" << format_rational(r.unicast_load) << '\n'
     << "map_delay=" << format_real(r.map_delay) << '\n'
     << "reduce_delay=" << format_real(r.reduce_delay) << '\n'
     << "delay=" << format_real(r.delay) << '\n'
     << "g_mean=" << format_real(r.g.mean()) << '\n';
  os << "g_distribution=";
  for (std::size_t i = 0; i < r.g.mass.size(); ++i) {
    if (i) os << ',';
    os << r.g.first + static_cast<Count>(i) << ':' << format_rational(r.g.mass[i]);
  }
  os << '\n'
     << "baseline_load=" << format_rational(r.baseline_load) << '\n'
     << "baseline_delay=" << format_real(r.baseline_delay) << '\n'
     << "load_norm=" << format_real(to_double(r.load_norm)) << '\n'
     << "map_delay_norm=" << format_real(r.map_delay_norm) << '\n'
     << "reduce_delay_norm=" << format_real(r.reduce_delay_norm) << '\n'
     << "delay_norm=" << format_real(r.delay_norm) << '\n'
     << "mode=" << r.mode.describe() << '\n'
     << "finisher_sets=" << r.sets << '\n';
  if (r.mode.kind == EvaluationMode::Kind::kSampled) {
    os << "samples=" << r.mode.samples << '\n' << "seed=" << r.mode.seed << '\n';
  }
  return os.str();
}

std::string report_csv_header() {
  return "L,L_norm,D_map,D_reduce,D,D_norm,g_mean,strategy_threshold,mode,samples,seed";
}

std::string to_csv_row(const PerformanceReport& r) {
  std::ostringstream os;
  const bool sampled = r.mode.kind == EvaluationMode::Kind::kSampled;
  os << format_real(to_double(r.load)) << ',' << format_real(to_double(r.load_norm)) << ','
     << format_real(r.map_delay) << ',' << format_real(r.reduce_delay) << ','
     << format_real(r.delay) << ',' << format_real(r.delay_norm) << ','
     << format_real(r.g.mean()) << ',' << r.threshold << ','
     << (sampled ? "sampled" : "exhaustive") << ',' << (sampled ? r.mode.samples : 0) << ','
     << (sampled ? r.mode.seed : 0);
  return os.str();
}

}  // namespace bdcode

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

#include "bdcode/shuffle_sim.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bdcode/model.hpp"

namespace bdcode {

namespace {

struct Value {
  Count partition;
  Count row;     // 1-based within the partition
  Count vector;  // 1-based
};

// held[finisher][vector slot][partition][row - 1]
class Ledger {
 public:
  Ledger(const SystemParameters& p, Count finishers)
      : rows_(p.rows_per_partition), partitions_(p.partitions), slots_(p.vectors_per_finisher),
        bits_(static_cast<std::size_t>(finishers * slots_ * partitions_ * rows_), false) {}

  bool mark(Count finisher, Count slot, Count partition, Count row) {
    auto bit = bits_[index(finisher, slot, partition, row)];
    if (bit) return false;
    bit = true;
    return true;
  }
  bool has(Count finisher, Count slot, Count partition, Count row) const {
    return bits_[index(finisher, slot, partition, row)];
  }
  Count count(Count finisher, Count slot, Count partition) const {
    Count c = 0;
    for (Count row = 1; row <= rows_; ++row) c += has(finisher, slot, partition, row);
    return c;
  }
  Count rows() const { return rows_; }

 private:
  std::size_t index(Count f, Count slot, Count t, Count row) const {
    return static_cast<std::size_t>(((f * slots_ + slot) * partitions_ + t) * rows_ + (row - 1));
  }
  Count rows_;
  Count partitions_;
  Count slots_;
  std::vector<bool> bits_;
};

std::vector<ServerMask> subsets_of(ServerMask set, Count size) {
  const auto members = mask_servers(set);
  std::vector<ServerMask> out;
  if (size < 1 || size > static_cast<Count>(members.size())) return out;
  for (const auto& pick : enumerate_batch_labels(static_cast<Count>(members.size()), size)) {
    ServerMask m = 0;
    for (Count i : pick.servers()) m |= ServerMask{1} << (members[static_cast<std::size_t>(i - 1)] - 1);
    out.push_back(m);
  }
  return out;
}

}  // namespace

std::vector<Count> responsible_vectors(const SystemParameters& p, ServerMask finishers, Count server) {
  const auto members = mask_servers(finishers);
  auto it = std::find(members.begin(), members.end(), server);
  if (it == members.end()) throw std::invalid_argument("server is not a finisher");
  const Count k = static_cast<Count>(it - members.begin());
  std::vector<Count> out;
  for (Count v = 0; v < p.vectors_per_finisher; ++v) out.push_back(k * p.vectors_per_finisher + v + 1);
  return out;
}

ShuffleTrace simulate_shuffle(const StorageDesign& design, ServerMask finishers, Count threshold) {
  const auto& p = design.params();
  if (threshold < 1) throw std::invalid_argument("multicast threshold must be at least 1");
  if (mask_size(finishers) != p.finishers || (finishers >> p.servers) != 0) {
    throw std::invalid_argument("finisher set must contain exactly q servers from 1..K");
  }
  const auto members = mask_servers(finishers);
  auto finisher_index = [&](Count server) {
    return static_cast<Count>(std::find(members.begin(), members.end(), server) - members.begin());
  };

  std::vector<std::vector<RowRange>> batch_rows;
  for (Count b = 0; b < p.batch_count; ++b) batch_rows.push_back(rows_of(design, b));
  // owner[t][row - 1]: batch storing that coded row
  std::vector<std::vector<Count>> owner(static_cast<std::size_t>(p.partitions),
                                        std::vector<Count>(static_cast<std::size_t>(p.rows_per_partition)));
  for (Count b = 0; b < p.batch_count; ++b) {
    for (const auto& range : batch_rows[static_cast<std::size_t>(b)]) {
      for (Count row = range.first; row <= range.last; ++row) {
        owner[static_cast<std::size_t>(range.partition)][static_cast<std::size_t>(row - 1)] = b;
      }
    }
  }

  ShuffleTrace trace;
  trace.finishers = finishers;
  trace.threshold = threshold;
  Ledger ledger(p, static_cast<Count>(members.size()));

  // Map phase: every finisher holds its own batches for all vectors.
  for (Count server : members) {
    const Count f = finisher_index(server);
    for (Count b = 0; b < p.batch_count; ++b) {
      if (!mask_contains(design.label_mask(b), server)) continue;
      for (const auto& range : batch_rows[static_cast<std::size_t>(b)]) {
        for (Count row = range.first; row <= range.last; ++row) {
          for (Count slot = 0; slot < p.vectors_per_finisher; ++slot) {
            ledger.mark(f, slot, range.partition, row);
          }
        }
      }
    }
  }

  for (Count j = p.servers_per_batch; j >= threshold; --j) {
    for (ServerMask group : subsets_of(finishers, j + 1)) {
      // segments[receiver][sender]: values the sender forwards to the receiver
      std::map<Count, std::map<Count, std::vector<Value>>> segments;
      for (Count receiver : mask_servers(group)) {
        const ServerMask others = group & ~(ServerMask{1} << (receiver - 1));
        const auto vectors = responsible_vectors(p, finishers, receiver);
        std::vector<Value> values;
        for (Count b = 0; b < p.batch_count; ++b) {
          if ((design.label_mask(b) & finishers) != others) continue;
          for (const auto& range : batch_rows[static_cast<std::size_t>(b)]) {
            for (Count row = range.first; row <= range.last; ++row) {
              for (Count v : vectors) values.push_back({range.partition, row, v});
            }
          }
        }
        // Even split into j segments, the larger ones first, handed to the
        // other group members in increasing server order.
        const Count total = static_cast<Count>(values.size());
        const Count small = total / j;
        const Count big_count = total % j;
        Count cursor = 0;
        Count k = 0;
        for (Count sender : mask_servers(others)) {
          const Count len = small + (k < big_count ? 1 : 0);
          auto& seg = segments[receiver][sender];
          seg.assign(values.begin() + cursor, values.begin() + cursor + len);
          cursor += len;
          ++k;
        }
      }
      for (Count sender : mask_servers(group)) {
        Count units = 0;
        for (Count receiver : mask_servers(group)) {
          if (receiver == sender) continue;
          units = std::max<Count>(units, static_cast<Count>(segments[receiver][sender].size()));
        }
        if (units == 0) continue;
        trace.multicasts.push_back({j, group, sender, units});
        trace.multicast_units += units;
        for (Count receiver : mask_servers(group)) {
          if (receiver == sender) continue;
          // The receiver must hold every other segment in the XOR to cancel it.
          for (Count other : mask_servers(group)) {
            if (other == sender || other == receiver) continue;
            for (const Value& v : segments[other][sender]) {
              const Count b_owner = owner[static_cast<std::size_t>(v.partition)][static_cast<std::size_t>(v.row - 1)];
              if (!mask_contains(design.label_mask(b_owner), receiver)) {
                throw std::logic_error("multicast segment not cancellable by its receiver");
              }
            }
          }
          const Count f = finisher_index(receiver);
          for (const Value& v : segments[receiver][sender]) {
            ledger.mark(f, (v.vector - 1) % p.vectors_per_finisher, v.partition, v.row);
          }
        }
      }
    }
  }

  // Unicast whatever each finisher still lacks, partition by partition.
  for (Count server : members) {
    const Count f = finisher_index(server);
    const auto vectors = responsible_vectors(p, finishers, server);
    for (Count slot = 0; slot < p.vectors_per_finisher; ++slot) {
      for (Count t = 0; t < p.partitions; ++t) {
        Count have = ledger.count(f, slot, t);
        const Count deficit = std::max<Count>(0, p.decode_threshold - have);
        if (deficit == 0) continue;
        Count given = 0;
        for (Count row = 1; row <= ledger.rows() && given < deficit; ++row) {
          if (ledger.mark(f, slot, t, row)) ++given;
        }
        trace.unicasts.push_back({server, t, vectors[static_cast<std::size_t>(slot)], deficit});
        trace.unicast_units += deficit;
      }
    }
  }

  trace.held.assign(members.size(), std::vector<Count>(static_cast<std::size_t>(p.partitions), 0));
  for (std::size_t f = 0; f < members.size(); ++f) {
    for (Count slot = 0; slot < p.vectors_per_finisher; ++slot) {
      for (Count t = 0; t < p.partitions; ++t) {
        const Count c = ledger.count(static_cast<Count>(f), slot, t);
        if (c < p.decode_threshold) throw std::logic_error("finisher left unable to decode");
        trace.held[f][static_cast<std::size_t>(t)] += c;
      }
    }
  }

  const Rational norm = Rational(p.source_rows) * p.vectors;
  trace.load = Rational(trace.multicast_units + trace.unicast_units) / norm;
  trace.rounding_slack = Rational(trace.multicast_units) - norm * multicast_load(p, threshold);
  return trace;
}

ShuffleTrace best_strategy_trace(const StorageDesign& design, ServerMask finishers) {
  const Count s_q = min_multicast_size(design.params());
  ShuffleTrace first = simulate_shuffle(design, finishers, s_q);
  if (s_q - 1 < 1) return first;
  ShuffleTrace second = simulate_shuffle(design, finishers, s_q - 1);
  return second.load < first.load ? second : first;
}

Count multicast_slack_bound(const SystemParameters& p, Count threshold) {
  Count bound = 0;
  for (Count j = std::max<Count>(threshold, 1); j <= p.servers_per_batch; ++j) {
    bound += binomial(p.finishers, j + 1) * (j + 1);
  }
  return bound;
}

std::string ShuffleTrace::to_log() const {
  std::ostringstream os;
  os << "# shuffle Q=" << format_servers(finishers) << " threshold=" << threshold << '\n';
  for (const auto& m : multicasts) {
    os << "multicast round=" << m.round << " group=" << format_servers(m.group)
       << " sender=" << m.sender << " units=" << m.units << '\n';
  }
  for (const auto& u : unicasts) {
    os << "unicast receiver=" << u.receiver << " partition=" << u.partition + 1
       << " vector=" << u.vector << " units=" << u.units << '\n';
  }
  os << "summary multicast_units=" << multicast_units << " unicast_units=" << unicast_units
     << " load=" << format_real(to_double(load)) << " load_exact=" << format_rational(load)
     << " rounding_slack=" << format_rational(rounding_slack) << '\n';
  return os.str();
}

CrossValidation cross_validate(const StorageDesign& design, const EvaluationMode& mode) {
  const auto& p = design.params();
  CrossValidation out;
  const Count s_q = min_multicast_size(p);
  std::vector<Count> thresholds{s_q};
  if (s_q - 1 >= 1) thresholds.push_back(s_q - 1);

  for (ServerMask set : finisher_sets(p, mode)) {
    ++out.sets_checked;
    for (Count s : thresholds) {
      const ShuffleTrace trace = simulate_shuffle(design, set, s);
      const UnicastTally tally = remaining_unicasts(design, set, s);
      if (trace.unicast_units != tally.total) {
        ++out.unicast_mismatches;
        out.details.push_back("Q=" + format_servers(set) + " s=" + std::to_string(s) +
                              " unicast sim=" + std::to_string(trace.unicast_units) +
                              " analytic=" + std::to_string(tally.total));
      }
      if (trace.rounding_slack < 0 || trace.rounding_slack > multicast_slack_bound(p, s)) {
        ++out.multicast_mismatches;
        out.details.push_back("Q=" + format_servers(set) + " s=" + std::to_string(s) +
                              " multicast slack=" + format_rational(trace.rounding_slack));
      }
      if (trace.rounding_slack > out.max_rounding_slack) out.max_rounding_slack = trace.rounding_slack;
    }
  }
  return out;
}

}  // namespace bdcode

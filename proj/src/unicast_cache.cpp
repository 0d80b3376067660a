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

#include "bdcode/unicast_cache.hpp"

#include <algorithm>
#include <stdexcept>

#include "bdcode/evaluation.hpp"

namespace bdcode {

UnicastCache::UnicastCache(const SystemParameters& params, Count threshold)
    : params_(params), threshold_(threshold) {
  if (threshold < 1 || threshold > params.servers_per_batch + 1) {
    throw std::invalid_argument("multicast threshold must lie in 1..mu*q+1");
  }
  if (binomial(params.servers, params.finishers) > kExhaustiveSetLimit) {
    throw std::invalid_argument("unicast cache needs C(K, q) within the exhaustive limit");
  }
  sets_ = all_finisher_sets(params.servers, params.finishers);
  const auto labels = enumerate_batch_labels(params.servers, params.servers_per_batch);
  const Count T = params.partitions;

  batch_pairs_.resize(labels.size());
  for (std::size_t si = 0; si < sets_.size(); ++si) {
    const ServerMask set = sets_[si];
    for (Count server : mask_servers(set)) {
      const auto pair = static_cast<std::int32_t>(pair_set_.size());
      pair_set_.push_back(static_cast<std::int32_t>(si));
      pair_server_.push_back(static_cast<std::int32_t>(server));
      std::vector<std::int32_t> visible;
      for (std::size_t b = 0; b < labels.size(); ++b) {
        const ServerMask label = labels[b].mask();
        if (mask_contains(label, server) || mask_size(label & set) >= threshold) {
          visible.push_back(static_cast<std::int32_t>(b));
          batch_pairs_[b].push_back(pair);
        }
      }
      pair_batches_.push_back(std::move(visible));
    }
  }
  const std::size_t pairs = pair_set_.size();
  need_.assign(pairs * static_cast<std::size_t>(T), static_cast<std::int32_t>(params.decode_threshold));
  pair_units_.assign(pairs, checked_mul(params.decode_threshold, T));
  units_ = checked_mul(static_cast<Count>(pairs), checked_mul(params.decode_threshold, T));
  nonzero_.resize(labels.size());
  for (std::size_t b = 0; b < labels.size(); ++b) {
    nonzero_[b] = pair_units_.empty() || params.decode_threshold == 0
                      ? 0
                      : static_cast<Count>(batch_pairs_[b].size());
  }
}

UnicastCache::UnicastCache(const SystemParameters& params, const AssignmentMatrix& partial,
                           Count threshold)
    : UnicastCache(params, threshold) {
  if (partial.batches() != params.batch_count || partial.partitions() != params.partitions) {
    throw std::invalid_argument("partial assignment has the wrong shape");
  }
  for (Count b = 0; b < partial.batches(); ++b) {
    for (Count t = 0; t < partial.partitions(); ++t) {
      if (partial.at(b, t) != 0) change(b, t, partial.at(b, t));
    }
  }
}

void UnicastCache::change(Count batch, Count partition, Count delta) {
  const std::size_t T = static_cast<std::size_t>(params_.partitions);
  for (std::int32_t pair : batch_pairs_[static_cast<std::size_t>(batch)]) {
    auto& need = need_[static_cast<std::size_t>(pair) * T + static_cast<std::size_t>(partition)];
    const Count before = std::max<Count>(0, need);
    need = static_cast<std::int32_t>(need - delta);
    const Count after = std::max<Count>(0, need);
    if (before == after) continue;
    auto& pu = pair_units_[static_cast<std::size_t>(pair)];
    const bool was_nonzero = pu != 0;
    pu += after - before;
    units_ += after - before;
    const bool is_nonzero = pu != 0;
    if (was_nonzero != is_nonzero) {
      const Count step = is_nonzero ? 1 : -1;
      for (std::int32_t b : pair_batches_[static_cast<std::size_t>(pair)]) {
        nonzero_[static_cast<std::size_t>(b)] += step;
      }
    }
  }
}

void UnicastCache::apply(Count batch, Count partition, Count delta) {
  if (batch < 0 || batch >= params_.batch_count || partition < 0 || partition >= params_.partitions) {
    throw std::out_of_range("unicast cache index");
  }
  change(batch, partition, delta);
  history_.push_back({static_cast<std::int32_t>(batch), static_cast<std::int32_t>(partition),
                      static_cast<std::int32_t>(delta)});
}

void UnicastCache::undo() {
  if (history_.empty()) throw std::logic_error("undo without a matching apply");
  const Step s = history_.back();
  history_.pop_back();
  change(s.batch, s.partition, -s.delta);
}

Rational UnicastCache::objective() const {
  return Rational(checked_mul(units_, params_.vectors_per_finisher)) /
         (Rational(params_.source_rows) * params_.vectors * set_count());
}

ServerMask UnicastCache::pair_set(Count pair) const {
  return sets_[static_cast<std::size_t>(pair_set_[static_cast<std::size_t>(pair)])];
}

Count UnicastCache::pair_server(Count pair) const {
  return pair_server_[static_cast<std::size_t>(pair)];
}

bool UnicastCache::same_state(const UnicastCache& other) const {
  return threshold_ == other.threshold_ && params_ == other.params_ && need_ == other.need_ &&
         pair_units_ == other.pair_units_ && nonzero_ == other.nonzero_ && units_ == other.units_;
}

}  // namespace bdcode

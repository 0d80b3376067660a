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

// Fixtures shared by the test binaries.

#pragma once

#include <filesystem>
#include <vector>

#include "bdcode/design.hpp"
#include "bdcode/random.hpp"
#include "bdcode/solvers.hpp"

namespace bdcode::testing {

inline std::filesystem::path data_dir() { return BDCODE_TEST_DATA; }

inline SystemParameters small_params() {
  return validate_parameters({20, 4, 4, 6, Rational(1, 2), 30, 5});
}

/// The hand-built example design: three consecutive batches per partition,
/// two rows each.
inline StorageDesign small_design() {
  const auto p = small_params();
  AssignmentMatrix m(p.batch_count, p.partitions);
  for (Count b = 0; b < p.batch_count; ++b) m.at(b, b / 3) = 2;
  return StorageDesign(p, m);
}

inline SystemParameters square_params(Count partitions = 1) {
  return validate_parameters({6000, 6000, 6, 9, Rational(1, 3), 9000, partitions});
}

/// (K, q, mu q) with the smallest m that makes every quantity integral,
/// T = 1 and N = q. The load model depends only on (K, q, mu q).
struct Shape {
  Count servers, finishers, per_batch;
};

inline std::vector<Shape> all_shapes(Count max_servers) {
  std::vector<Shape> out;
  for (Count K = 1; K <= max_servers; ++K)
    for (Count q = 1; q <= K; ++q)
      for (Count mq = 1; mq <= q; ++mq) out.push_back({K, q, mq});
  return out;
}

inline SystemParameters shape_params(const Shape& s, Count partitions = 1) {
  const Count batches = binomial(s.servers, s.per_batch);
  // r = K m / q must be divisible by the batch count and by T.
  for (Count j = 1;; ++j) {
    const Count m = s.finishers * j * partitions;
    const Count r = s.servers * j * partitions;
    if (r % batches != 0) continue;
    RawParameters raw{m, 1, s.finishers, s.servers, Rational(s.per_batch, s.finishers), r, partitions};
    try {
      return validate_parameters(raw);
    } catch (const ParameterError&) {
    }
    if (j > 100000) throw std::logic_error("no admissible m");
  }
}

/// K=6, q=4, mu=1/2 designs with `partitions` partitions, one per seed.
inline StorageDesign random_k6_design(Count partitions, std::uint64_t seed) {
  const auto p = small_params().with_partitions(partitions);
  return StorageDesign(p, random_assign(p, seed));
}

}  // namespace bdcode::testing

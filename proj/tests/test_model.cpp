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

#include <cmath>

#include "bdcode/model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bdcode;
using bdcode::testing::all_shapes;
using bdcode::testing::shape_params;
using bdcode::testing::alpha_oracle;
using bdcode::testing::load_oracle;

TEST_CASE("order statistic mean") {
  CHECK(order_statistic_mean({1.0, 1, 1}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(order_statistic_mean({1.0, 6, 6}) == doctest::Approx(3.45).epsilon(1e-15));
  for (Count K = 2; K <= 4; ++K) {
    double h = 0;
    for (Count j = 1; j <= K; ++j) h += 1.0 / static_cast<double>(j);
    CHECK(order_statistic_mean({2.5, K, K}) == doctest::Approx(2.5 * (1 + h)));
  }
  for (Count K = 1; K <= 12; ++K) {
    for (Count g = 1; g < K; ++g) {
      CHECK(order_statistic_mean({1.0, K, g}) < order_statistic_mean({1.0, K, g + 1}));
      CHECK(order_statistic_mean({7.0, K, g}) == doctest::Approx(7.0 * order_statistic_mean({1.0, K, g})));
    }
  }
  CHECK_THROWS(order_statistic_mean({1.0, 3, 4}));
  CHECK_THROWS(order_statistic_mean({0.0, 3, 2}));
}

TEST_CASE("alpha on the small example") {
  const auto p = bdcode::testing::small_params();
  CHECK(alpha(2, p) == Rational(3, 10));
  CHECK(alpha(1, p) == Rational(6, 10));
  CHECK(alpha(0, p) == Rational(1, 10));
  CHECK(alpha(3, p) == 0);
  CHECK(min_multicast_size(p) == 2);
  CHECK(multicast_load(p, 2) == Rational(3, 20));
  const MdsLoad l = load_mds(p);
  CHECK(l.load == Rational(7, 20));
  CHECK(l.threshold == 2);
  REQUIRE(l.second.has_value());
  CHECK(*l.second == Rational(3, 4));
}

TEST_CASE("single-term strategy reduces to alpha/muq + 1 - mu - alpha") {
  for (const auto& s : all_shapes(10)) {
    const auto p = shape_params(s);
    if (min_multicast_size(p) != p.servers_per_batch) continue;
    const Rational a = alpha(p.servers_per_batch, p);
    CHECK(load_mds(p).first == a / p.servers_per_batch + 1 - p.storage - a);
  }
}

TEST_CASE("alpha matches the factorial oracle and the Vandermonde identity") {
  for (const auto& s : all_shapes(12)) {
    const auto p = shape_params(s);
    Rational sum = 0;
    for (Count j = 0; j <= p.servers_per_batch; ++j) {
      CHECK(alpha(j, p) == alpha_oracle(j, s.servers, s.finishers, s.per_batch));
      sum += alpha(j, p);
    }
    // sum_j alpha_j (q/K) C(K, mu q) = C(K-1, mu q)
    CHECK(sum * Rational(p.finishers, p.servers) * p.batch_count ==
          Rational(binomial(p.servers - 1, p.servers_per_batch)));
    CHECK(alpha(p.servers_per_batch + 1, p) == 0);
  }
}

TEST_CASE("load_mds equals the brute-force evaluation") {
  for (const auto& s : all_shapes(10)) {
    const auto p = shape_params(s);
    CAPTURE(s.servers);
    CAPTURE(s.finishers);
    CAPTURE(s.per_batch);
    CHECK(load_mds(p).load == load_oracle(s.servers, s.finishers, s.per_batch));
    const Count sq = min_multicast_size(p);
    CHECK(sq >= 1);
    CHECK(sq <= p.servers_per_batch + 1);
  }
}

TEST_CASE("s_q for the nine-server system") {
  const auto p = bdcode::testing::square_params();
  // alpha_2 = 5/12 <= 2/3, alpha_1 + alpha_2 = 25/24 > 2/3
  CHECK(alpha(2, p) == Rational(5, 12));
  CHECK(alpha(1, p) == Rational(5, 8));
  CHECK(min_multicast_size(p) == 2);
  CHECK(load_mds(p).load == load_oracle(9, 6, 2));
  CHECK(load_mds(p).load == Rational(11, 24));
}

TEST_CASE("full storage needs no multicast beyond s_q") {
  for (const auto& s : all_shapes(8)) {
    if (s.per_batch != s.finishers) continue;
    const auto p = shape_params(s);
    const Count sq = min_multicast_size(p);
    Rational tail = 0;
    for (Count l = sq; l <= p.servers_per_batch; ++l) tail += alpha(l, p);
    CHECK(tail == 0);
  }
}

TEST_CASE("operation counts") {
  const auto p = bdcode::testing::square_params();
  CHECK(sigma_map(p) == 648000000);
  CHECK(sigma_reduce(p) == Rational(162000000));
  CHECK(sigma_reduce(p.with_partitions(50)) == Rational(3240000));
  CHECK(sigma_map(bdcode::testing::small_params()) == 960);
  const auto min_storage = validate_parameters({6, 2, 3, 3, Rational(1, 3), 6, 1});
  CHECK(sigma_map(min_storage) == 6 * 2 * 3);
}

TEST_CASE("delays of the square system") {
  const auto p = bdcode::testing::square_params();
  const double map = map_delay(p, GDistribution::point_mass(6));
  double h = 0;
  for (int j = 4; j <= 9; ++j) h += 1.0 / j;
  CHECK(map == doctest::Approx(7.2e7 * (1 + h) / 36000.0));
  CHECK(map == doctest::Approx(3991.27).epsilon(1e-5));
  CHECK(reduce_delay(p) == doctest::Approx(2587.5));
  CHECK(reduce_delay(p.with_partitions(50)) == doctest::Approx(51.75));
  CHECK(overall_delay(map, reduce_delay(p)) == doctest::Approx(6578.77).epsilon(1e-5));
  CHECK(overall_delay(0, 3.0) == 3.0);
  CHECK(overall_delay(3.0, 0) == 3.0);
}

TEST_CASE("degenerate systems") {
  // q = K: nothing to erase.
  const auto all = validate_parameters({6, 1, 2, 2, Rational(1, 2), 6, 1});
  CHECK(all.finishers == 2);
  CHECK(sigma_reduce(all) == 0);
  CHECK(reduce_delay(all) == 0.0);
  // K = g = 1
  const auto one = validate_parameters({4, 3, 2, 1, Rational(1), 4, 1});
  CHECK(map_delay(one, GDistribution::point_mass(1)) ==
        doctest::Approx(2.0 * static_cast<double>(sigma_map(one)) / (4 * 2)));
}

TEST_CASE("g distribution checks") {
  GDistribution g;
  g.first = 4;
  g.mass = {Rational(1, 2), Rational(1, 4)};
  CHECK_THROWS_AS(g.check_normalized(), std::invalid_argument);
  CHECK_THROWS(map_delay(bdcode::testing::small_params(), g));
  g.mass.push_back(Rational(1, 4));
  CHECK_NOTHROW(g.check_normalized());
  CHECK(g.mean() == doctest::Approx(4.75));
  CHECK(g.probability(6) == Rational(1, 4));
  CHECK(g.probability(9) == 0);
  CHECK(GDistribution::point_mass(5).is_point_mass_at(5));
  CHECK_FALSE(g.is_point_mass_at(4));
}

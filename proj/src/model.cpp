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

#include "bdcode/model.hpp"

#include <cmath>
#include <stdexcept>

namespace bdcode {

double order_statistic_mean(const DelayParameters& p) {
  if (p.sigma <= 0.0 || p.server_count < 1 || p.wait_for < 1 || p.wait_for > p.server_count) {
    throw std::invalid_argument("order_statistic_mean: need sigma > 0 and 1 <= g <= K");
  }
  double tail = 0.0;
  for (Count j = p.server_count - p.wait_for + 1; j <= p.server_count; ++j) {
    tail += 1.0 / static_cast<double>(j);
  }
  return p.sigma * (1.0 + tail);
}

GDistribution GDistribution::point_mass(Count g) { return GDistribution{g, {Rational(1)}}; }

Rational GDistribution::probability(Count g) const {
  if (g < first || g > last()) return Rational(0);
  return mass[static_cast<std::size_t>(g - first)];
}

double GDistribution::mean() const {
  double out = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    out += to_double(mass[i]) * static_cast<double>(first + static_cast<Count>(i));
  }
  return out;
}

bool GDistribution::is_point_mass_at(Count g) const { return probability(g) == 1; }

void GDistribution::check_normalized() const {
  Rational total = 0;
  for (const auto& m : mass) {
    if (m < 0) throw std::invalid_argument("g distribution has negative mass");
    total += m;
  }
  if (std::abs(to_double(total) - 1.0) > 1e-12) {
    throw std::invalid_argument("g distribution sums to " + format_rational(total));
  }
}

Rational alpha(Count j, const SystemParameters& p) {
  const Count mu_q = p.servers_per_batch;
  if (j < 0 || j > mu_q) return Rational(0);
  Count num = checked_mul(binomial(p.finishers - 1, j),
                          binomial(p.servers - p.finishers, mu_q - j));
  // num / ((q/K) * C(K, mu q))
  return Rational(checked_mul(num, p.servers), checked_mul(p.finishers, p.batch_count));
}

Count min_multicast_size(const SystemParameters& p) {
  const Count mu_q = p.servers_per_batch;
  const Rational budget = 1 - p.storage;
  Rational tail = 0;
  Count best = mu_q + 1;  // empty sum is always within budget
  for (Count s = mu_q; s >= 1; --s) {
    tail += alpha(s, p);
    if (tail <= budget) {
      best = s;
    } else {
      break;  // tail only grows as s decreases
    }
  }
  return best;
}

Rational multicast_load(const SystemParameters& p, Count threshold) {
  Rational out = 0;
  for (Count j = std::max<Count>(threshold, 1); j <= p.servers_per_batch; ++j) {
    out += alpha(j, p) / j;
  }
  return out;
}

MdsLoad load_mds(const SystemParameters& p) {
  const Count s_q = min_multicast_size(p);
  Rational covered = 0;
  for (Count j = s_q; j <= p.servers_per_batch; ++j) covered += alpha(j, p);

  MdsLoad out;
  out.first = multicast_load(p, s_q) + 1 - p.storage - covered;
  out.load = out.first;
  out.threshold = s_q;
  if (s_q - 1 >= 1) {
    out.second = multicast_load(p, s_q - 1);
    if (*out.second < out.first) {
      out.load = *out.second;
      out.threshold = s_q - 1;
    }
  }
  return out;
}

Count sigma_map(const SystemParameters& p) {
  // K * mu * m == K * (mu m)
  return checked_mul(checked_mul(checked_mul(p.servers, p.rows_per_server), p.columns), p.vectors);
}

Rational sigma_reduce(const SystemParameters& p) {
  Rational r2 = Rational(checked_mul(p.coded_rows, p.coded_rows));
  return r2 * (1 - Rational(p.finishers, p.servers)) * p.vectors / p.partitions;
}

double map_delay(const SystemParameters& p, const GDistribution& g) {
  g.check_normalized();
  if (g.first < 1 || g.last() > p.servers) {
    throw std::invalid_argument("g distribution support outside 1..K");
  }
  const double per_server = static_cast<double>(sigma_map(p)) / static_cast<double>(p.servers);
  const double norm = static_cast<double>(p.source_rows) * static_cast<double>(p.vectors);
  double out = 0.0;
  for (std::size_t i = 0; i < g.mass.size(); ++i) {
    if (g.mass[i] == 0) continue;
    DelayParameters d{per_server, p.servers, g.first + static_cast<Count>(i)};
    out += to_double(g.mass[i]) * order_statistic_mean(d);
  }
  return out / norm;
}

double reduce_delay(const SystemParameters& p) {
  const Rational sigma = sigma_reduce(p);
  if (sigma == 0) return 0.0;
  const double norm = static_cast<double>(p.source_rows) * static_cast<double>(p.vectors);
  DelayParameters d{to_double(sigma / p.finishers), p.finishers, p.finishers};
  return order_statistic_mean(d) / norm;
}

}  // namespace bdcode

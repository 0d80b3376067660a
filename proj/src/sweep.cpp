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

#include "bdcode/sweep.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>

namespace bdcode {

namespace {

std::optional<SystemParameters> try_scaled(Count servers, Count finishers, Count rows,
                                           const ServerScaling& s) {
  if (rows <= 0 || rows % s.rows_per_partition != 0) return std::nullopt;
  const Rational coded = Rational(rows) / s.rate;
  if (denominator(coded) != 1) return std::nullopt;
  RawParameters raw;
  raw.source_rows = rows;
  raw.columns = s.columns;
  raw.vectors = s.vectors > 0 ? s.vectors : finishers;
  raw.servers = servers;
  raw.storage = Rational(s.servers_per_batch, finishers);
  raw.coded_rows = static_cast<Count>(numerator(coded));
  raw.partitions = rows / s.rows_per_partition;
  try {
    return validate_parameters(raw);
  } catch (const ParameterError&) {
    return std::nullopt;
  }
}

SweepRow failed_row(Count value, std::string series, std::uint64_t seed, std::string note) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepRow row;
  row.value = value;
  row.series = std::move(series);
  row.seed = seed;
  row.load = row.load_norm = row.map_delay = row.reduce_delay = nan;
  row.delay = row.delay_norm = row.g_mean = nan;
  row.valid = false;
  row.note = std::move(note);
  return row;
}

SweepRow report_row(Count value, std::string series, std::uint64_t seed, const PerformanceReport& r) {
  SweepRow row;
  row.value = value;
  row.series = std::move(series);
  row.seed = seed;
  row.load = to_double(r.load);
  row.load_norm = to_double(r.load_norm);
  row.map_delay = r.map_delay;
  row.reduce_delay = r.reduce_delay;
  row.delay = r.delay;
  row.delay_norm = r.delay_norm;
  row.g_mean = r.g.mean();
  return row;
}

}  // namespace

SystemParameters scaled_parameters(Count servers, const ServerScaling& s) {
  if (servers <= 0 || s.servers_per_batch <= 0 || s.rows_per_server <= 0 ||
      s.rows_per_partition <= 0 || s.rate <= 0) {
    throw ParameterError(ParameterViolation::kNonPositive, "scaling rules must be positive");
  }
  const Rational q = Rational(servers) * s.rate;
  if (denominator(q) != 1) {
    throw ParameterError(ParameterViolation::kFinishersNotInteger,
                         "K * m / r is not an integer for K=" + std::to_string(servers));
  }
  const Count finishers = static_cast<Count>(numerator(q));
  const Rational ideal_exact = Rational(s.rows_per_server) * finishers / s.servers_per_batch;
  const Count ideal = static_cast<Count>(std::llround(to_double(ideal_exact)));
  for (Count d = 0; d <= ideal / 2; ++d) {
    if (auto p = try_scaled(servers, finishers, ideal - d, s)) return *p;
    if (d > 0) {
      if (auto p = try_scaled(servers, finishers, ideal + d, s)) return *p;
    }
  }
  throw ParameterError(ParameterViolation::kBatchSizeNotInteger,
                       "no admissible m near " + std::to_string(ideal) + " for K=" +
                           std::to_string(servers));
}

SystemParameters sweep_point_parameters(const SweepSpec& spec, Count value) {
  if (spec.variable == SweepSpec::Variable::kServers) return scaled_parameters(value, spec.scaling);
  RawParameters raw = spec.base;
  raw.partitions = value;
  return validate_parameters(raw);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  const auto& values = spec.values;
  const Count points = static_cast<Count>(values.size());
  const Count per_point = 1 + spec.random_samples;

  // One task per (point, series member); solver runs are the expensive ones
  // and are scheduled dynamically next to the cheap random evaluations.
  const Count tasks = points * per_point;
  std::vector<std::optional<PerformanceReport>> reports(static_cast<std::size_t>(tasks));
  std::vector<std::string> notes(static_cast<std::size_t>(tasks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));

#pragma omp parallel for schedule(dynamic, 1)
  for (Count task = 0; task < tasks; ++task) {
    const auto slot = static_cast<std::size_t>(task);
    const Count value = values[static_cast<std::size_t>(task / per_point)];
    const Count member = task % per_point;
    try {
      const SystemParameters p = sweep_point_parameters(spec, value);
      if (member == 0) {
        SolverResult solved = solve(p, spec.solver);
        if (!solved.log.valid) {
          notes[slot] = solved.log.note;
          continue;
        }
        StorageDesign design(p, std::move(solved.assignment));
        reports[slot] = evaluate(design, spec.mode, Backend::kParallel);
      } else {
        StorageDesign design(p, random_assign(p, spec.solver.seed + static_cast<std::uint64_t>(member - 1)));
        reports[slot] = evaluate(design, spec.mode, Backend::kParallel);
      }
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<SweepRow> rows;
  for (Count i = 0; i < points; ++i) {
    const Count value = values[static_cast<std::size_t>(i)];
    const auto base = static_cast<std::size_t>(i * per_point);
    const std::string solver_name = to_string(spec.solver.kind);
    if (reports[base]) {
      SweepRow row = report_row(value, solver_name, spec.solver.seed, *reports[base]);
      row.exact_load = reports[base]->load;
      row.exact_load_norm = reports[base]->load_norm;
      rows.push_back(std::move(row));
    } else {
      rows.push_back(failed_row(value, solver_name, spec.solver.seed, notes[base]));
    }
    if (spec.random_samples == 0) continue;
    // Averaged in seed order so the mean does not depend on scheduling.
    SweepRow mean;
    mean.value = value;
    mean.series = "random_mean";
    mean.seed = spec.solver.seed;
    const double n = static_cast<double>(spec.random_samples);
    for (Count k = 1; k <= spec.random_samples; ++k) {
      const PerformanceReport& r = *reports[base + static_cast<std::size_t>(k)];
      mean.load += to_double(r.load) / n;
      mean.load_norm += to_double(r.load_norm) / n;
      mean.map_delay += r.map_delay / n;
      mean.reduce_delay += r.reduce_delay / n;
      mean.delay += r.delay / n;
      mean.delay_norm += r.delay_norm / n;
      mean.g_mean += r.g.mean() / n;
    }
    rows.push_back(std::move(mean));
  }
  return rows;
}

std::string sweep_csv_header(const SweepSpec& spec) {
  const char* var = spec.variable == SweepSpec::Variable::kServers ? "K" : "T";
  return std::string(var) + ",L,L_norm,D_map,D_reduce,D,D_norm,g_mean,solver,seed";
}

std::string to_csv_row(const SweepRow& row) {
  std::ostringstream os;
  os << row.value << ',' << format_real(row.load) << ',' << format_real(row.load_norm) << ','
     << format_real(row.map_delay) << ',' << format_real(row.reduce_delay) << ','
     << format_real(row.delay) << ',' << format_real(row.delay_norm) << ','
     << format_real(row.g_mean) << ',' << row.series << ',' << row.seed;
  return os.str();
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  os << sweep_csv_header(spec) << '\n';
  for (const auto& row : rows) os << to_csv_row(row) << '\n';
}

}  // namespace bdcode

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

// Serial reference against the OpenMP backend for the evaluation kernels.

#include <benchmark/benchmark.h>

#include "bdcode/evaluation.hpp"
#include "bdcode/solvers.hpp"
#include "bdcode/sweep.hpp"

namespace {

using namespace bdcode;

StorageDesign square_design(Count partitions) {
  const auto p = validate_parameters({6000, 6000, 6, 9, Rational(1, 3), 9000, partitions});
  return StorageDesign(p, heuristic_assign(p).matrix);
}

StorageDesign scaled_design(Count servers) {
  const auto p = scaled_parameters(servers, ServerScaling{});
  return StorageDesign(p, heuristic_assign(p).matrix);
}

void BM_UnicastTotals(benchmark::State& state, Backend backend) {
  const auto design = square_design(state.range(0));
  const auto& p = design.params();
  const auto sets = all_finisher_sets(p.servers, p.finishers);
  const Count s = min_multicast_size(p);
  for (auto _ : state) benchmark::DoNotOptimize(unicast_totals(design, sets, s, backend));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sets.size()));
}

void BM_GExhaustive(benchmark::State& state, Backend backend) {
  const auto design = square_design(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(g_distribution(design, EvaluationMode::exhaustive(), backend));
}

void BM_GSampled(benchmark::State& state, Backend backend) {
  const auto design = scaled_design(state.range(0));
  const auto mode = EvaluationMode::sampled(1000, 0);
  for (auto _ : state) benchmark::DoNotOptimize(g_distribution(design, mode, backend));
}

void BM_LoadSampled(benchmark::State& state, Backend backend) {
  const auto design = scaled_design(state.range(0));
  const auto mode = EvaluationMode::sampled(1000, 0);
  for (auto _ : state) benchmark::DoNotOptimize(load_bdc(design, mode, backend));
}

}  // namespace

BENCHMARK_CAPTURE(BM_UnicastTotals, serial, Backend::kSerial)->Arg(50)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_UnicastTotals, parallel, Backend::kParallel)->Arg(50)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GExhaustive, serial, Backend::kSerial)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GExhaustive, parallel, Backend::kParallel)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GSampled, serial, Backend::kSerial)->Arg(9)->Arg(15)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GSampled, parallel, Backend::kParallel)->Arg(9)->Arg(15)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_LoadSampled, serial, Backend::kSerial)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_LoadSampled, parallel, Backend::kParallel)->Arg(12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

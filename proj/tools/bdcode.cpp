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

// bdcode command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 validation or parse failure,
// 3 solver infeasible, 4 I/O failure.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdcode/design_io.hpp"
#include "bdcode/evaluation.hpp"
#include "bdcode/shuffle_sim.hpp"
#include "bdcode/solvers.hpp"
#include "bdcode/sweep.hpp"

namespace {

using namespace bdcode;

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Values given on the command line; unset ones fall back to the file.
struct ParamFlags {
  std::string file;
  std::optional<Count> m, n, N, K, r, T;
  std::optional<std::string> mu;

  void attach(CLI::App* cmd, bool file_required = false) {
    auto* opt = cmd->add_option("--params", file, "key=value parameter file");
    if (file_required) opt->required();
    cmd->add_option("-m,--source-rows", m, "source rows m");
    cmd->add_option("-n,--columns", n, "columns n");
    cmd->add_option("-N,--vectors", N, "input vectors N");
    cmd->add_option("-K,--servers", K, "servers K");
    cmd->add_option("-r,--coded-rows", r, "coded rows r");
    cmd->add_option("-T,--partitions", T, "partitions T");
    cmd->add_option("--mu", mu, "storage fraction as p/q");
  }

  RawParameters resolve() const {
    RawParameters raw;
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw IoError("cannot open " + file);
      // Comments and line breaks are irrelevant; all tokens form one header.
      std::string line, joined;
      while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        joined += line + ' ';
      }
      raw = parse_parameters(joined);
    }
    if (m) raw.source_rows = *m;
    if (n) raw.columns = *n;
    if (N) raw.vectors = *N;
    if (K) raw.servers = *K;
    if (r) raw.coded_rows = *r;
    if (T) raw.partitions = *T;
    if (mu) raw.storage = parse_rational(*mu);
    return raw;
  }
};

struct SolverFlags {
  std::string solver = "heuristic";
  std::uint64_t seed = 0;
  std::string threshold;
  Count decrements = 0;
  Count window = 10;
  Count max_iterations = 0;
  double time_budget = 0.0;
  Count node_limit = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--solver", solver, "heuristic | bnb | hybrid | random | exhaustive")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--threshold", threshold, "hybrid stop threshold as p/q (load units)");
    cmd->add_option("--decrements", decrements, "hybrid elements decremented per iteration");
    cmd->add_option("--window", window, "hybrid improvement window")->capture_default_str();
    cmd->add_option("--max-iterations", max_iterations, "hybrid iteration cap (0 = none)");
    cmd->add_option("--time-budget", time_budget, "hybrid wall-clock cap in seconds (0 = none)");
    cmd->add_option("--node-limit", node_limit, "branch-and-bound node cap per call (0 = none)");
  }

  SolverConfig config() const {
    SolverConfig c;
    c.kind = parse_solver_kind(solver);
    c.seed = seed;
    if (!threshold.empty()) c.threshold = parse_rational(threshold);
    c.decrement_count = decrements;
    c.window = window;
    c.max_iterations = max_iterations;
    c.time_budget_seconds = time_budget;
    c.node_limit = node_limit;
    return c;
  }
};

std::vector<Count> parse_list(const std::string& text) {
  std::vector<Count> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    Count v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

// Writes to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

int cmd_validate(const ParamFlags& flags) {
  const SystemParameters p = validate_parameters(flags.resolve());
  std::cout << "valid=true\n"
            << format_parameters(p.raw()) << '\n'
            << "q=" << p.finishers << '\n'
            << "mu_q=" << p.servers_per_batch << '\n'
            << "mu_m=" << p.rows_per_server << '\n'
            << "batch_count=" << p.batch_count << '\n'
            << "batch_size=" << p.batch_size << '\n'
            << "rows_per_partition=" << p.rows_per_partition << '\n'
            << "decode_threshold=" << p.decode_threshold << '\n'
            << "vectors_per_finisher=" << p.vectors_per_finisher << '\n'
            << "s_q=" << min_multicast_size(p) << '\n'
            << "load_mds=" << format_rational(load_mds(p).load) << '\n'
            << "max_lossless_partitions=" << p.coded_rows / p.batch_count << '\n';
  return 0;
}

int cmd_solve(const ParamFlags& pflags, const SolverFlags& sflags, const std::string& out,
              const std::string& log_path) {
  const SystemParameters p = validate_parameters(pflags.resolve());
  const SolverConfig config = sflags.config();
  if (config.kind == SolverKind::kHeuristic) {
    HeuristicResult h = heuristic_assign(p);
    if (!h.valid()) {
      std::ostringstream os;
      for (const auto& v : h.violations) os << "\n  " << v.describe();
      throw Infeasible("heuristic matrix violates the sum conditions:" + os.str());
    }
  }
  SolverResult result = solve(p, config);
  if (!result.log.valid) throw Infeasible(result.log.note);
  StorageDesign design(p, std::move(result.assignment));
  save_design(out, design, "solver=" + result.log.solver + " seed=" + std::to_string(result.log.seed));
  emit(log_path, result.log.to_key_value());
  return 0;
}

int cmd_evaluate(const std::string& design_path, const std::string& mode_text, std::uint64_t seed,
                 bool per_set, bool csv, bool serial) {
  const StorageDesign design = load_design(design_path);
  const auto& p = design.params();
  const EvaluationMode mode = EvaluationMode::parse(mode_text, seed);
  const Backend backend = serial ? Backend::kSerial : Backend::kParallel;
  const PerformanceReport report = evaluate(design, mode, backend);
  if (csv) {
    std::cout << report_csv_header() << '\n' << to_csv_row(report) << '\n';
  } else {
    std::cout << to_key_value(report);
  }
  if (per_set) {
    // Distinct sets only, in increasing mask order.
    auto sets = finisher_sets(p, mode);
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    const Count s_q = min_multicast_size(p);
    std::vector<Count> thresholds{s_q};
    if (s_q - 1 >= 1) thresholds.push_back(s_q - 1);
    const Rational norm = Rational(p.source_rows) * p.vectors;
    for (ServerMask set : sets) {
      std::cout << "set Q=" << format_servers(set);
      for (Count s : thresholds) {
        const UnicastTally tally = remaining_unicasts(design, set, s);
        const Rational load = multicast_load(p, s) + Rational(tally.total) / norm;
        std::cout << " s=" << s << " unicast=" << tally.total << " per_server=";
        for (std::size_t i = 0; i < tally.units.size(); ++i) {
          std::cout << (i ? "," : "") << tally.units[i];
        }
        std::cout << " load=" << format_real(to_double(load)) << " load_exact=" << format_rational(load);
      }
      std::cout << '\n';
    }
  }
  return 0;
}

int cmd_simulate(const std::string& design_path, const std::string& finishers_text,
                 const std::string& strategy, const std::string& out) {
  const StorageDesign design = load_design(design_path);
  const auto& p = design.params();
  const auto servers = parse_list(finishers_text);
  for (Count s : servers) {
    if (s < 1 || s > p.servers) {
      throw std::invalid_argument("server " + std::to_string(s) + " outside 1.." + std::to_string(p.servers));
    }
  }
  const ServerMask set = servers_mask(servers);
  if (mask_size(set) != p.finishers || static_cast<Count>(servers.size()) != p.finishers) {
    throw std::invalid_argument("finisher set needs exactly q=" + std::to_string(p.finishers) +
                                " distinct servers");
  }
  const Count s_q = min_multicast_size(p);
  ShuffleTrace trace;
  if (strategy == "auto") {
    trace = best_strategy_trace(design, set);
  } else if (strategy == "sq") {
    trace = simulate_shuffle(design, set, s_q);
  } else if (strategy == "sq-1") {
    if (s_q - 1 < 1) throw std::invalid_argument("strategy s_q-1 unavailable: s_q=1");
    trace = simulate_shuffle(design, set, s_q - 1);
  } else {
    trace = simulate_shuffle(design, set, parse_list(strategy).front());
  }
  emit(out, trace.to_log());
  return 0;
}

int cmd_sweep(SweepSpec spec, const ParamFlags& pflags, const std::string& vary,
              const std::string& values, const std::string& mode_text, const std::string& out) {
  if (vary == "T") {
    spec.variable = SweepSpec::Variable::kPartitions;
    spec.base = pflags.resolve();
    validate_parameters(spec.base);
  } else if (vary == "K") {
    spec.variable = SweepSpec::Variable::kServers;
  } else {
    throw std::invalid_argument("--vary must be T or K");
  }
  spec.values = parse_list(values);
  spec.mode = EvaluationMode::parse(mode_text, spec.solver.seed);
  for (Count v : spec.values) {
    const SystemParameters p = sweep_point_parameters(spec, v);
    if (spec.variable == SweepSpec::Variable::kServers) {
      std::cerr << "# K=" << v << ": " << format_parameters(p.raw()) << '\n';
    }
  }
  const auto rows = run_sweep(spec);
  std::ostringstream os;
  write_sweep_csv(os, spec, rows);
  emit(out, os.str());
  bool infeasible = false;
  for (const auto& row : rows) {
    if (!row.valid) {
      std::cerr << "point " << row.value << ": " << row.note << '\n';
      infeasible = true;
    }
  }
  return infeasible ? kExitInfeasible : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-diagonal coded matrix multiplication: design, solve, evaluate, simulate"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "check parameters and print derived quantities");
  ParamFlags validate_params;
  validate_params.attach(validate);

  auto* solve_cmd = app.add_subcommand("solve", "build an assignment and write a design file");
  ParamFlags solve_params;
  SolverFlags solve_flags;
  std::string solve_out, solve_log;
  solve_params.attach(solve_cmd);
  solve_flags.attach(solve_cmd);
  solve_cmd->add_option("--out", solve_out, "design file (.json for JSON)")->required();
  solve_cmd->add_option("--log", solve_log, "solver log file (default stdout)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "load and delay of a design");
  std::string eval_design, eval_mode = "exhaustive";
  std::uint64_t eval_seed = 0;
  bool eval_per_set = false, eval_csv = false, eval_serial = false;
  evaluate_cmd->add_option("--design", eval_design, "design file")->required();
  evaluate_cmd->add_option("--mode", eval_mode, "exhaustive | sampled:N")->capture_default_str();
  evaluate_cmd->add_option("--seed", eval_seed, "seed for sampled mode")->capture_default_str();
  evaluate_cmd->add_flag("--per-set", eval_per_set, "print one line per finisher set");
  evaluate_cmd->add_flag("--csv", eval_csv, "print a CSV row instead of key=value");
  evaluate_cmd->add_flag("--serial", eval_serial, "use the serial reference kernels");

  auto* simulate_cmd = app.add_subcommand("simulate", "message-level shuffle trace for one finisher set");
  std::string sim_design, sim_finishers, sim_strategy = "auto", sim_out;
  simulate_cmd->add_option("--design", sim_design, "design file")->required();
  simulate_cmd->add_option("--finishers,-Q", sim_finishers, "comma-separated finisher set")->required();
  simulate_cmd->add_option("--strategy", sim_strategy, "auto | sq | sq-1 | <threshold>")
      ->capture_default_str();
  simulate_cmd->add_option("--out", sim_out, "trace file (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "CSV over a list of T or K values");
  ParamFlags sweep_params;
  SolverFlags sweep_solver;
  SweepSpec sweep_spec;
  std::string sweep_vary = "T", sweep_values, sweep_mode = "exhaustive", sweep_out, sweep_rate = "2/3";
  sweep_params.attach(sweep_cmd);
  sweep_solver.attach(sweep_cmd);
  sweep_cmd->add_option("--vary", sweep_vary, "T or K")->capture_default_str();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated sweep values")->required();
  sweep_cmd->add_option("--mode", sweep_mode, "exhaustive | sampled:N")->capture_default_str();
  sweep_cmd->add_option("--random-samples", sweep_spec.random_samples,
                        "add a random_mean series over this many random assignments");
  sweep_cmd->add_option("--mu-q", sweep_spec.scaling.servers_per_batch, "K sweep: mu q")
      ->capture_default_str();
  sweep_cmd->add_option("--mu-m", sweep_spec.scaling.rows_per_server, "K sweep: mu m")
      ->capture_default_str();
  sweep_cmd->add_option("--rows-per-partition", sweep_spec.scaling.rows_per_partition, "K sweep: m/T")
      ->capture_default_str();
  sweep_cmd->add_option("--rate", sweep_rate, "K sweep: code rate m/r as p/q")->capture_default_str();
  sweep_cmd->add_option("--sweep-columns", sweep_spec.scaling.columns, "K sweep: columns n")
      ->capture_default_str();
  sweep_cmd->add_option("--sweep-vectors", sweep_spec.scaling.vectors, "K sweep: N (0 means N = q)")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_params);
    if (*solve_cmd) return cmd_solve(solve_params, solve_flags, solve_out, solve_log);
    if (*evaluate_cmd) {
      return cmd_evaluate(eval_design, eval_mode, eval_seed, eval_per_set, eval_csv, eval_serial);
    }
    if (*simulate_cmd) return cmd_simulate(sim_design, sim_finishers, sim_strategy, sim_out);
    if (*sweep_cmd) {
      sweep_spec.solver = sweep_solver.config();
      sweep_spec.scaling.rate = parse_rational(sweep_rate);
      return cmd_sweep(sweep_spec, sweep_params, sweep_vary, sweep_values, sweep_mode, sweep_out);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Infeasible& e) {
    std::cerr << "error: infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::length_error& e) {
    std::cerr << "error: infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    // Parse errors, design violations and bad arguments.
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}

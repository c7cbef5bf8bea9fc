/*
 * Copyright 2026 The dfc-nvm Authors
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
// dfc: command-line front end for the crash checker and the benchmarks.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfc/bench/bench.hpp"
#include "dfc/dfc.hpp"
#include "dfc/harness/runner.hpp"
#include "dfc/harness/schedule_io.hpp"

namespace {

using namespace dfc;

std::size_t line_bytes_from_env() {
  const char* env = std::getenv("DFC_NVM_LINE_BYTES");
  if (env == nullptr || *env == '\0') return 64;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v < 32 || (v & (v - 1)) != 0) {
    throw Fault("DFC_NVM_LINE_BYTES must be a power of two of at least 32, got '" + std::string(env) + "'");
  }
  return v;
}

struct CheckArgs {
  std::string kind = "stack";
  std::size_t threads = 4;
  std::size_t ops = 32;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::string policy = "persisted-only";
  std::size_t crashes = 1;
  std::string target;
  std::string schedule_file;
  std::string trace_out;
  bool sweep = false;
  bool brute_force = false;
  bool quiet = false;
};

std::string describe(const harness::CaseOutcome& o) {
  std::ostringstream out;
  const auto& h = o.result.history;
  out << (o.ok() ? "ACCEPT" : "FAIL") << " ops=" << h.ops.size() << " crashes=" << h.crashes.size()
      << " steps=" << o.result.steps << " phases=" << o.result.stats.phases
      << " recovered=" << o.detectability.checked;
  if (!o.crash_classes.empty()) {
    out << " classes=";
    for (std::size_t i = 0; i < o.crash_classes.size(); ++i) out << (i ? "," : "") << to_string(o.crash_classes[i]);
  }
  if (o.brute_force) out << " brute-force=" << (o.brute_force->skipped ? "skipped" : o.brute_force->accepted ? "accept" : "reject");
  if (!o.ok()) out << " : " << o.failure;
  return out.str();
}

int run_check(const CheckArgs& a) {
  const std::size_t line_bytes = line_bytes_from_env();
  std::ofstream trace;
  if (!a.trace_out.empty()) {
    trace.open(a.trace_out);
    if (!trace) throw Fault("cannot open " + a.trace_out);
  }
  auto report_failure = [&](const harness::CaseOutcome& o) {
    if (trace.is_open()) {
      harness::write_counterexample(trace, o);
      trace << "\n";
    }
  };

  if (!a.schedule_file.empty()) {
    std::ifstream in(a.schedule_file);
    if (!in) throw Fault("cannot open " + a.schedule_file);
    std::stringstream text;
    text << in.rdbuf();
    harness::RunConfig config = harness::parse_run_config(text.str());
    config.line_bytes = line_bytes;
    const auto outcome = harness::evaluate(config, a.brute_force);
    std::cout << "schedule " << a.schedule_file << ": " << describe(outcome) << "\n";
    if (!outcome.ok()) report_failure(outcome);
    if (!a.quiet) std::cout << outcome.result.history.to_text();
    return outcome.ok() ? 0 : 1;
  }

  const auto kind = parse_structure_kind(a.kind);
  if (!kind) throw Fault("unknown kind " + a.kind);
  const auto policy = CrashPolicy::parse(a.policy, a.seed);
  if (!policy) throw Fault("unknown policy " + a.policy);
  std::optional<harness::CrashClass> target;
  if (!a.target.empty()) {
    target = harness::parse_crash_class(a.target);
    if (!target) throw Fault("unknown crash class " + a.target);
  }

  std::size_t failures = 0;
  for (std::size_t i = 0; i < a.seeds; ++i) {
    const std::uint64_t seed = a.seed + i;
    if (a.sweep) {
      const auto report = harness::run_boundary_sweep(*kind, *policy, seed, a.threads, a.ops);
      std::cout << "seed " << seed << ": sweep runs=" << report.runs << " rejects=" << report.rejects
                << " detect-failures=" << report.detect_failures << " memory-failures=" << report.memory_failures
                << (report.ok() ? " ACCEPT" : " FAIL") << "\n";
      if (!report.ok()) {
        ++failures;
        if (report.first_failure) {
          std::cout << "  " << report.first_failure->failure << "\n";
          report_failure(*report.first_failure);
        }
      }
      continue;
    }
    harness::CaseRequest request;
    request.kind = *kind;
    request.policy = *policy;
    if (request.policy.mode == CrashPolicy::Mode::kRandomized) request.policy.seed = seed;
    request.seed = seed;
    request.threads = a.threads;
    request.ops = a.ops;
    request.crashes = a.crashes;
    request.target = target;
    harness::CaseOutcome outcome = harness::run_targeted_case(request);
    if (line_bytes != 64 || a.brute_force) {
      outcome.config.line_bytes = line_bytes;
      outcome = harness::evaluate(outcome.config, a.brute_force);
    }
    std::cout << "seed " << seed << ": " << describe(outcome) << "\n";
    if (!outcome.ok()) {
      ++failures;
      report_failure(outcome);
    }
  }
  std::cout << (failures == 0 ? "all " : "") << a.seeds - failures << "/" << a.seeds << " accepted\n";
  return failures == 0 ? 0 : 1;
}

struct BenchArgs {
  std::string kind = "push-pop";
  std::vector<std::size_t> threads{1};
  std::size_t ops = 200'000;
  std::uint64_t seed = 1;
  std::size_t reps = 10;
  std::string mode = "deterministic";
  std::string out;
  std::size_t pool = 4096;
  bool gnuplot = false;
};

int run_bench(const BenchArgs& a) {
  std::vector<bench::BenchReport> reports;
  std::stringstream kinds(a.kind);
  std::string name;
  while (std::getline(kinds, name, ',')) {
    const auto workload = bench::parse_workload(name);
    if (!workload) throw Fault("unknown workload " + name);
    const auto mode = bench::parse_mode(a.mode);
    if (!mode) throw Fault("unknown mode " + a.mode);
    for (std::size_t t : a.threads) {
      bench::WorkloadSpec spec;
      spec.workload = *workload;
      spec.threads = t;
      spec.ops = a.ops;
      spec.seed = a.seed;
      spec.reps = a.reps;
      spec.mode = *mode;
      spec.pool_capacity = a.pool;
      spec.line_bytes = line_bytes_from_env();
      reports.push_back(bench::run_benchmark(spec));
      std::cerr << name << " threads=" << t << " done\n";
    }
  }
  if (a.out.empty()) {
    bench::write_csv(std::cout, reports);
  } else {
    bench::emit_report(reports, a.out, a.gnuplot);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detectable flat-combining structures over simulated NVM"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Run crash schedules and check durable linearizability and detectability");
  c->add_option("--kind", check.kind, "stack | queue | deque")->check(CLI::IsMember({"stack", "queue", "deque"}));
  c->add_option("--threads", check.threads, "Simulated threads")->check(CLI::Range(1, 63));
  c->add_option("--ops", check.ops, "Total operations per schedule");
  c->add_option("--seed", check.seed, "First seed");
  c->add_option("--seeds", check.seeds, "Number of consecutive seeds");
  c->add_option("--policy", check.policy, "persisted-only | adversarial-prefix | randomized")
      ->check(CLI::IsMember({"persisted-only", "adversarial-prefix", "randomized"}));
  c->add_option("--crashes", check.crashes, "Crash points per schedule");
  c->add_option("--target", check.target, "Crash class of the first crash point");
  c->add_option("--schedule", check.schedule_file, "Replay a JSON schedule file");
  c->add_option("--trace-out", check.trace_out, "Write counterexample traces here");
  c->add_flag("--sweep", check.sweep, "Crash at every write, pwb and pfence of one schedule per seed");
  c->add_flag("--brute-force", check.brute_force, "Also run the exhaustive search (at most 10 ops)");
  c->add_flag("--quiet", check.quiet, "Omit the history of a replayed schedule");

  BenchArgs bench_args;
  auto* b = app.add_subcommand("bench", "Run benchmark workloads and report persistence instructions per op");
  b->add_option("--kind", bench_args.kind, "push-pop | rand-op | enq-deq | pushfr-popfr | rand-op-deque (comma list)");
  b->add_option("--threads", bench_args.threads, "Thread counts (comma list)")->delimiter(',');
  b->add_option("--ops", bench_args.ops, "Total operations, split equally between threads");
  b->add_option("--seed", bench_args.seed);
  b->add_option("--reps", bench_args.reps, "Repetitions; the median is reported");
  b->add_option("--mode", bench_args.mode, "deterministic | threads")
      ->check(CLI::IsMember({"deterministic", "threads"}));
  b->add_option("--pool", bench_args.pool, "Node pool capacity")->check(CLI::Range(1, 4096));
  b->add_option("--out", bench_args.out, "CSV output path (stdout if omitted)");
  b->add_flag("--gnuplot", bench_args.gnuplot, "Also write <out>.dat");

  CLI11_PARSE(app, argc, argv);
  try {
    if (c->parsed()) return run_check(check);
    return run_bench(bench_args);
  } catch (const Fault& f) {
    std::cerr << "error: " << f.what() << "\n";
    return 2;
  }
}

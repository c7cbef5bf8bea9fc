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
#include "dfc/bench/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>
#include <utility>

#include "dfc/dfc.hpp"
#include "dfc/harness/scheduler.hpp"

namespace dfc::bench {

namespace {

constexpr std::array<std::pair<Workload, std::string_view>, 5> kWorkloads{{
    {Workload::kPushPop, "push-pop"},
    {Workload::kRandOp, "rand-op"},
    {Workload::kEnqDeq, "enq-deq"},
    {Workload::kPushFrPopFr, "pushfr-popfr"},
    {Workload::kRandOpDeque, "rand-op-deque"},
}};

// Op sequence of one thread. Insert values are unique across threads.
std::vector<std::pair<OpName, Word>> thread_ops(Workload w, std::size_t count, ThreadId t, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 1000003ULL + t);
  std::vector<std::pair<OpName, Word>> ops;
  ops.reserve(count);
  const Word base = static_cast<Word>(t) * count;
  for (std::size_t i = 0; i < count; ++i) {
    OpName name = OpName::kNone;
    switch (w) {
      case Workload::kPushPop:
        name = i % 2 == 0 ? OpName::kPush : OpName::kPop;
        break;
      case Workload::kRandOp:
        name = rng() % 2 == 0 ? OpName::kPush : OpName::kPop;
        break;
      case Workload::kEnqDeq:
        name = i % 2 == 0 ? OpName::kEnqueue : OpName::kDequeue;
        break;
      case Workload::kPushFrPopFr: {
        // Each couple picks its side at random; the pop follows on the same side.
        if (i % 2 == 0) {
          name = rng() % 2 == 0 ? OpName::kPushFront : OpName::kPushRear;
        } else {
          name = ops.back().first == OpName::kPushFront ? OpName::kPopFront : OpName::kPopRear;
        }
        break;
      }
      case Workload::kRandOpDeque: {
        constexpr std::array<OpName, 4> names{OpName::kPushFront, OpName::kPushRear, OpName::kPopFront,
                                              OpName::kPopRear};
        name = names[rng() % 4];
        break;
      }
    }
    ops.emplace_back(name, is_insert(name) ? base + i + 1 : 0);
  }
  return ops;
}

template <typename T>
double median(std::vector<T> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? static_cast<double>(values[n / 2])
                    : (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string_view to_string(Workload w) {
  for (const auto& [k, name] : kWorkloads) {
    if (k == w) return name;
  }
  return "?";
}

std::optional<Workload> parse_workload(std::string_view name) {
  for (const auto& [k, text] : kWorkloads) {
    if (text == name) return k;
  }
  return std::nullopt;
}

StructureKind structure_of(Workload w) {
  switch (w) {
    case Workload::kPushPop:
    case Workload::kRandOp:
      return StructureKind::kStack;
    case Workload::kEnqDeq:
      return StructureKind::kQueue;
    case Workload::kPushFrPopFr:
    case Workload::kRandOpDeque:
      return StructureKind::kDeque;
  }
  return StructureKind::kStack;
}

bool is_paired(Workload w) {
  return w == Workload::kPushPop || w == Workload::kEnqDeq || w == Workload::kPushFrPopFr;
}

std::string_view to_string(Mode m) { return m == Mode::kDeterministic ? "deterministic" : "threads"; }

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "deterministic") return Mode::kDeterministic;
  if (name == "threads") return Mode::kThreads;
  return std::nullopt;
}

RepMetrics run_once(const WorkloadSpec& spec, std::uint64_t seed) {
  if (spec.threads == 0) throw Fault("bench: at least one thread required");
  if (spec.ops % spec.threads != 0) throw Fault("bench: ops must be divisible by threads");
  const std::size_t per_thread = spec.ops / spec.threads;
  if (is_paired(spec.workload) && per_thread % 2 != 0) throw Fault("bench: paired workloads need an even op count per thread");

  SimulatedNvm nvm(NvmConfig{spec.line_bytes, spec.threads + 1, false});
  auto object = make_structure(structure_of(spec.workload), nvm, CombinerConfig{spec.threads, spec.pool_capacity, "bench"});
  std::atomic<std::uint64_t> pool_full{0};
  object->set_phase_listener([&pool_full](const PhaseRecord& r) { pool_full += r.pool_full; });

  std::vector<ThreadCtx> ctx;
  std::vector<std::vector<std::pair<OpName, Word>>> ops;
  for (std::size_t t = 1; t <= spec.threads; ++t) {
    ctx.push_back(object->register_thread());
    ops.push_back(thread_ops(spec.workload, per_thread, static_cast<ThreadId>(t), seed));
  }
  auto body = [&](std::size_t i) {
    for (const auto& [name, param] : ops[i]) object->execute(ctx[i], name, param);
  };

  const auto start = std::chrono::steady_clock::now();
  if (spec.mode == Mode::kDeterministic) {
    harness::Schedule schedule;
    schedule.seed = seed;
    harness::FiberScheduler scheduler(nvm, schedule, ~std::uint64_t{0});
    nvm.set_observer(&scheduler);
    std::vector<harness::FiberScheduler::Body> bodies;
    for (std::size_t i = 0; i < spec.threads; ++i) {
      bodies.push_back({static_cast<ThreadId>(i + 1), [&body, i] { body(i); }});
    }
    const auto outcome = scheduler.run(std::move(bodies), false);
    nvm.set_observer(nullptr);
    if (outcome != harness::FiberScheduler::Outcome::kCompleted) throw Fault("bench: deterministic run did not complete");
  } else {
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < spec.threads; ++i) workers.emplace_back(body, i);
    for (std::thread& w : workers) w.join();
  }
  const auto stop = std::chrono::steady_clock::now();

  if (pool_full.load() != 0) {
    throw Fault("bench: node pool exhausted (" + std::to_string(pool_full.load()) + " inserts refused); raise the pool capacity or lower ops");
  }
  const ProtocolStats stats = object->stats();
  const MetricsSnapshot metrics = nvm.metrics_snapshot();
  RepMetrics m;
  m.seconds = std::chrono::duration<double>(stop - start).count();
  m.ops = spec.ops;
  m.pwb_total = metrics.total.pwb;
  m.pfence_total = metrics.total.pfence;
  m.pwb_announce = stats.announce_cost.pwb;
  m.pfence_announce = stats.announce_cost.pfence;
  m.pwb_core = stats.combiner_cost.pwb;
  m.pfence_core = stats.combiner_cost.pfence;
  m.phases = stats.phases;
  m.collected = stats.collected;
  m.allocations = stats.allocations;
  m.nodes_flushed = stats.nodes_flushed;
  m.roots_flushed = stats.roots_flushed;
  m.eliminated_pairs = stats.eliminated_pairs;
  m.pool_full = pool_full.load();
  return m;
}

BenchReport run_benchmark(const WorkloadSpec& spec) {
  if (spec.reps == 0) throw Fault("bench: at least one repetition required");
  BenchReport report;
  report.spec = spec;
  std::vector<double> ops_per_sec, pwb_total, pwb_core, pfence_total, pfence_core, phases;
  for (std::size_t r = 0; r < spec.reps; ++r) {
    const RepMetrics m = run_once(spec, spec.seed + r);
    const double n = static_cast<double>(m.ops);
    ops_per_sec.push_back(m.seconds > 0 ? n / m.seconds : 0);
    pwb_total.push_back(static_cast<double>(m.pwb_total) / n);
    pwb_core.push_back(static_cast<double>(m.pwb_core) / n);
    pfence_total.push_back(static_cast<double>(m.pfence_total) / n);
    pfence_core.push_back(static_cast<double>(m.pfence_core) / n);
    phases.push_back(static_cast<double>(m.phases) / n);
    report.reps.push_back(m);
  }
  report.ops_per_sec = median(ops_per_sec);
  report.pwb_total = median(pwb_total);
  report.pwb_core = median(pwb_core);
  report.pfence_total = median(pfence_total);
  report.pfence_core = median(pfence_core);
  report.phases_per_op = median(phases);
  return report;
}

void write_csv(std::ostream& out, const std::vector<BenchReport>& reports) {
  out << kCsvHeader << "\n";
  for (const BenchReport& r : reports) {
    out << to_string(r.spec.workload) << "," << r.spec.threads << "," << r.spec.seed << "," << fmt(r.ops_per_sec)
        << "," << fmt(r.pwb_total) << "," << fmt(r.pwb_core) << "," << fmt(r.pfence_total) << ","
        << fmt(r.pfence_core) << "," << fmt(r.phases_per_op) << "\n";
  }
}

void write_gnuplot(std::ostream& out, const std::vector<BenchReport>& reports) {
  out << "# " << kCsvHeader << "\n";
  for (const BenchReport& r : reports) {
    out << to_string(r.spec.workload) << " " << r.spec.threads << " " << r.spec.seed << " " << fmt(r.ops_per_sec)
        << " " << fmt(r.pwb_total) << " " << fmt(r.pwb_core) << " " << fmt(r.pfence_total) << " "
        << fmt(r.pfence_core) << " " << fmt(r.phases_per_op) << "\n";
  }
}

void emit_report(const std::vector<BenchReport>& reports, const std::string& path, bool gnuplot) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw Fault("cannot open " + path);
  write_csv(csv, reports);
  if (gnuplot) {
    std::ofstream dat(path + ".dat", std::ios::binary);
    if (!dat) throw Fault("cannot open " + path + ".dat");
    write_gnuplot(dat, reports);
  }
}

}  // namespace dfc::bench

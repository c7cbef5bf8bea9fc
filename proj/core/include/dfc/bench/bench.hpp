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
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfc/types.hpp"

namespace dfc::bench {

enum class Workload : std::uint8_t { kPushPop, kRandOp, kEnqDeq, kPushFrPopFr, kRandOpDeque };

std::string_view to_string(Workload w);
std::optional<Workload> parse_workload(std::string_view name);
StructureKind structure_of(Workload w);
/// Paired workloads alternate insert and remove on every thread.
bool is_paired(Workload w);

enum class Mode : std::uint8_t {
  kDeterministic,  // fiber scheduler on one OS thread, seeded random slices
  kThreads,        // one OS thread per simulated thread
};

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

struct WorkloadSpec {
  Workload workload = Workload::kPushPop;
  std::size_t ops = 200'000;  // total operations over all threads
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  std::size_t reps = 10;
  Mode mode = Mode::kDeterministic;
  std::size_t line_bytes = 64;
  std::size_t pool_capacity = 4096;
};

/// Raw totals of one repetition.
struct RepMetrics {
  double seconds = 0;
  std::uint64_t ops = 0;
  std::uint64_t pwb_total = 0;
  std::uint64_t pfence_total = 0;
  std::uint64_t pwb_announce = 0;
  std::uint64_t pfence_announce = 0;
  std::uint64_t pwb_core = 0;
  std::uint64_t pfence_core = 0;
  std::uint64_t phases = 0;
  std::uint64_t collected = 0;
  std::uint64_t allocations = 0;
  std::uint64_t nodes_flushed = 0;
  std::uint64_t roots_flushed = 0;
  std::uint64_t eliminated_pairs = 0;
  std::uint64_t pool_full = 0;
};

/// Per-op figures are the median over the repetitions, each taken
/// independently.
struct BenchReport {
  WorkloadSpec spec;
  double ops_per_sec = 0;
  double pwb_total = 0;
  double pwb_core = 0;
  double pfence_total = 0;
  double pfence_core = 0;
  double phases_per_op = 0;
  std::vector<RepMetrics> reps;
};

/// Runs the workload `spec.reps` times (repetition r uses seed + r for its
/// schedule and op choices). Faults if an insert meets a full pool.
BenchReport run_benchmark(const WorkloadSpec& spec);
RepMetrics run_once(const WorkloadSpec& spec, std::uint64_t seed);

inline constexpr std::string_view kCsvHeader =
    "kind,threads,seed,ops_per_sec,pwb_total,pwb_core,pfence_total,pfence_core,phases_per_op";

void write_csv(std::ostream& out, const std::vector<BenchReport>& reports);
/// Whitespace-separated columns with a leading comment line, for gnuplot.
void write_gnuplot(std::ostream& out, const std::vector<BenchReport>& reports);
/// Writes the CSV to `path`, and `path` with a .dat suffix when `gnuplot`.
void emit_report(const std::vector<BenchReport>& reports, const std::string& path, bool gnuplot = false);

}  // namespace dfc::bench

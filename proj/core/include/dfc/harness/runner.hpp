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

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfc/combining.hpp"
#include "dfc/harness/checker.hpp"
#include "dfc/harness/history.hpp"
#include "dfc/harness/oracle.hpp"
#include "dfc/harness/scheduler.hpp"

namespace dfc::harness {

using Script = std::vector<OpSpec>;

struct RunConfig {
  StructureKind kind = StructureKind::kStack;
  std::size_t threads = 2;
  std::vector<Script> scripts;  // one per thread, thread i + 1 runs scripts[i]
  Schedule schedule;
  CrashPolicy policy = CrashPolicy::persisted_only();
  std::size_t pool_capacity = NodePool::kDefaultCapacity;
  std::size_t line_bytes = 64;
  std::uint64_t step_limit = 4'000'000;
  bool record_trace = false;
  bool record_phases = false;
};

/// Where a crash point falls relative to the persistence protocol. Derived
/// from the access the crash pre-empts and from what the same thread did
/// just before.
enum class CrashClass : std::uint8_t {
  kBeforeAnnouncePersist,  // announcement record written, not yet fenced
  kValidFlipUnpersisted,   // flip of valid about to be written or not yet fenced
  kBeforeReadyBit,         // flip durable, ready bit not yet set
  kAfterReadyBit,          // ready bit just set
  kMidCombine,             // combiner before its first epoch increment
  kOddEpochUnpersisted,    // first increment written, not yet fenced
  kOddEpochPersisted,      // first increment durable, second not written
  kMidRecovery,            // inside a recovery round
  kOther,
};
inline constexpr std::size_t kCrashClassCount = 8;  // excluding kOther

std::string_view to_string(CrashClass c);
std::optional<CrashClass> parse_crash_class(std::string_view name);

struct RunResult {
  History history;
  std::uint64_t steps = 0;
  bool step_limit_hit = false;
  std::optional<std::string> fault;
  /// Most global steps any op spent between invocation and completion.
  std::uint64_t max_op_steps = 0;
  std::uint64_t max_late_per_op = 0;
  ProtocolStats stats;  // summed over every attached object
  MetricsSnapshot metrics;
  std::size_t memory_checks = 0;
  std::vector<std::string> memory_failures;
  std::vector<TraceEntry> trace;
  std::vector<CrashClass> trace_classes;  // parallel to trace
  std::vector<PhaseRecord> phases;
};

RunResult run_schedule(const RunConfig& config);

std::vector<CrashClass> classify_trace(const std::vector<TraceEntry>& trace, const DetectableCombiner& object);

/// Random scripts with globally unique insert values 1, 2, ...
/// `paired` selects the benchmark-style pairing: false draws every op
/// independently, true alternates insert and remove on each thread.
std::vector<Script> generate_scripts(StructureKind kind, std::size_t threads, std::size_t total_ops,
                                     std::uint64_t seed, bool paired = false);

/// Verdicts for one run.
struct CaseOutcome {
  RunConfig config;
  RunResult result;
  Verdict witness;
  std::optional<SearchResult> brute_force;
  DetectabilityReport detectability;
  std::vector<CrashClass> crash_classes;  // class of each crash point taken
  bool ok() const { return failure.empty(); }
  std::string failure;
};

CaseOutcome evaluate(const RunConfig& config, bool with_brute_force = false);

struct CaseRequest {
  StructureKind kind = StructureKind::kStack;
  CrashPolicy policy = CrashPolicy::persisted_only();
  std::uint64_t seed = 1;
  std::size_t threads = 4;
  std::size_t ops = 32;
  std::size_t crashes = 1;
  /// Class of the first crash point; kMidRecovery makes the second crash
  /// land inside the first recovery round.
  std::optional<CrashClass> target;
};

/// Probes the crash-free run, places crash points on the requested classes
/// (re-probing after each crash), then runs and checks the final schedule.
CaseOutcome run_targeted_case(const CaseRequest& request);

struct FuzzOptions {
  StructureKind kind = StructureKind::kStack;
  CrashPolicy::Mode policy = CrashPolicy::Mode::kPersistedOnly;
  std::size_t schedules = 100;
  std::size_t max_threads = 8;
  std::size_t max_ops = 64;
  std::uint64_t seed = 1;
};

struct FuzzReport {
  std::size_t runs = 0;
  std::size_t rejects = 0;
  std::size_t detect_failures = 0;
  std::size_t memory_failures = 0;
  std::size_t incomplete = 0;
  std::size_t crashes = 0;
  std::size_t memory_checks = 0;
  std::size_t detect_checks = 0;
  std::uint64_t max_late_per_op = 0;
  std::array<std::size_t, kCrashClassCount> class_hits{};
  std::optional<CaseOutcome> first_failure;
  bool ok() const { return runs > 0 && !first_failure; }
  void add(const CaseOutcome& outcome);
};

FuzzReport run_fuzz(const FuzzOptions& options, const std::function<void(const CaseOutcome&)>& on_case = {});

/// Crash right before and right after every write, pwb and pfence of one
/// small crash-free schedule.
FuzzReport run_boundary_sweep(StructureKind kind, CrashPolicy policy, std::uint64_t seed, std::size_t threads,
                              std::size_t ops);

}  // namespace dfc::harness

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
#include <optional>
#include <string>
#include <vector>

#include "dfc/harness/oracle.hpp"
#include "dfc/types.hpp"

namespace dfc::harness {

/// How an operation ended. A crashed operation is resolved from the
/// persisted announcement: if its flip of `valid` survived, recovery runs it
/// (kExecuted), otherwise it never happened (kDropped).
enum class OpStatus : std::uint8_t { kCompleted, kExecuted, kDropped };

std::string_view to_string(OpStatus status);

struct OpEvent {
  std::uint32_t id = 0;
  ThreadId thread = 0;
  OpName name = OpName::kNone;
  Word param = 0;
  std::uint32_t buffer = 0;  // announcement record the op used
  std::uint32_t era = 0;     // crashes before the invocation
  std::uint64_t invoke_clock = 0;
  /// Completion for kCompleted ops, the crash for crashed ones.
  std::uint64_t end_clock = 0;
  OpStatus status = OpStatus::kCompleted;
  Response response;          // kCompleted only
  std::optional<Word> stamp;  // epoch of the phase that applied it
};

struct CrashEvent {
  std::uint64_t clock = 0;
  std::uint64_t step = 0;
  bool during_recovery = false;
  Word persisted_epoch = 0;
};

/// Return value of `recover` on one thread in the recovery round that
/// completed after crash number `crash` (1-based).
struct RecoveryEvent {
  ThreadId thread = 0;
  std::uint32_t crash = 0;
  Response response;
};

struct History {
  StructureKind kind = StructureKind::kStack;
  std::size_t threads = 0;
  std::vector<OpEvent> ops;
  std::vector<CrashEvent> crashes;
  std::vector<RecoveryEvent> recoveries;
  std::vector<Word> final_contents;
  Word final_epoch = 0;
  bool complete = true;  // false if the run stopped early (step limit, fault)

  std::string to_text() const;
};

}  // namespace dfc::harness

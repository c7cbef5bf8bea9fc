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

#include "dfc/harness/history.hpp"

namespace dfc::harness {

/// Outcome of a checker. `order` lists op ids in the witness linearization;
/// `linearized[id]` is the response the op takes in it (empty for ops that
/// are not linearized).
struct Verdict {
  bool accepted = true;
  std::string reason;
  std::vector<std::uint32_t> order;
  std::vector<std::optional<Response>> linearized;
};

/// Builds the per-phase witness order and replays it through the sequential
/// object. Phases are ordered by the stamped epoch. Inside a phase:
///   stack  eliminated pairs (tails of the id-sorted push and pop lists,
///          each push immediately followed by its pop), then the surplus
///          in increasing id order;
///   queue  enqueues by id, then dequeues by id;
///   deque  front pairs, rear pairs, remaining front ops, remaining rear ops.
/// Rejects on a response mismatch, a real-time inversion, an uncommitted
/// stamp or a final state that differs from the replay.
Verdict check_durably_linearizable(const History& history);

struct SearchResult {
  bool accepted = false;
  bool skipped = false;  // history above the size cap
  std::string reason;
  std::uint64_t states = 0;
};

/// Exhaustive search over all orders that respect real time. Completed ops
/// are mandatory; crashed ops (executed or dropped) are optional and their
/// responses unconstrained. The final state must match the recorded one.
SearchResult brute_force_linearizable(const History& history, std::size_t max_ops = 10);

struct DetectabilityReport {
  bool accepted = true;
  std::string reason;
  std::size_t checked = 0;           // recover() returns compared
  std::size_t executed_pending = 0;  // crashed ops finished by recovery
  std::size_t dropped_pending = 0;   // crashed ops that never took effect
};

/// Every recover() return equals the response of the thread's last op that
/// took effect before the crash: the witness response for a crashed op that
/// recovery executed, the recorded response for a completed one, and ⊥ when
/// the thread has no such op.
DetectabilityReport check_detectable(const History& history, const Verdict& witness);

}  // namespace dfc::harness

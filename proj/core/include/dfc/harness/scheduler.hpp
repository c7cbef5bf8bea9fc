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
#include <exception>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "dfc/nvm.hpp"

namespace dfc::harness {

struct Slice {
  ThreadId thread = 0;
  std::uint32_t steps = 0;
  friend bool operator==(const Slice&, const Slice&) = default;
};

/// Replayable interleaving. Slices run first, in order; slices naming a
/// thread that is not runnable are skipped. Once they are used up, the
/// scheduler draws a runnable thread and a slice length in [1, 8] from a
/// generator seeded with `seed`. Round-robin mode ignores both and gives
/// every runnable thread one step in turn.
///
/// A crash point c stops the world right before the access that would be
/// the c-th (0-based) of the whole run, counting across recovery rounds.
struct Schedule {
  std::vector<Slice> slices;
  std::vector<std::uint64_t> crash_points;  // ascending
  std::uint64_t seed = 0;
  bool round_robin = false;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct TraceEntry {
  std::uint64_t step = 0;
  ThreadId thread = 0;
  Access access = Access::kRead;
  PersistentAddress addr;
  Word value = 0;
  bool recovery = false;
};

/// Thrown inside a simulated thread to abandon it at a crash.
struct CrashSignal {};

/// Deterministic driver: each simulated thread is a fiber and every
/// simulated memory access is a potential preemption point. All fibers run
/// on the calling OS thread.
class FiberScheduler final : public StepObserver {
 public:
  enum class Outcome { kCompleted, kCrashed, kStepLimit };

  struct Body {
    ThreadId thread = 0;
    std::function<void()> fn;
  };

  FiberScheduler(SimulatedNvm& nvm, Schedule schedule, std::uint64_t step_limit);
  ~FiberScheduler() override;

  /// Runs one round: every body to completion, or until the next crash point
  /// or the step limit. On a crash every unfinished body is unwound with
  /// CrashSignal. A body that throws anything else aborts the round and the
  /// exception is rethrown here.
  Outcome run(std::vector<Body> bodies, bool recovery_round);

  std::uint64_t step() const { return step_; }
  std::size_t crashes_taken() const { return crash_cursor_; }
  void set_trace(std::vector<TraceEntry>* trace) { trace_ = trace; }

  void before_access(ThreadId thread, Access access, PersistentAddress addr, Word value) override;
  bool drives_current_thread() const override { return in_fiber_; }

 private:
  struct Fiber;

  bool crash_due() const;
  void pick_slice(const std::vector<std::size_t>& runnable, std::size_t& index, std::uint32_t& steps);
  void yield_to_scheduler();
  void unwind_all();

  SimulatedNvm& nvm_;
  Schedule schedule_;
  std::uint64_t step_limit_;
  std::mt19937_64 rng_;
  std::size_t slice_cursor_ = 0;
  std::size_t crash_cursor_ = 0;
  std::uint64_t step_ = 0;
  std::uint32_t budget_ = 0;
  std::size_t rr_next_ = 0;
  bool in_fiber_ = false;
  bool unwinding_ = false;
  bool recovery_round_ = false;
  enum class Stop { kNone, kCrash, kLimit } stop_ = Stop::kNone;
  std::vector<std::unique_ptr<Fiber>> fibers_;
  Fiber* current_ = nullptr;
  std::vector<TraceEntry>* trace_ = nullptr;
};

}  // namespace dfc::harness

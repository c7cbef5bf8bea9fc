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
#include "dfc/harness/scheduler.hpp"

#include <algorithm>
#include <boost/context/fiber.hpp>
#include <boost/context/fixedsize_stack.hpp>

namespace dfc::harness {

namespace ctx = boost::context;

namespace {
constexpr std::size_t kFiberStack = 256 * 1024;
}  // namespace

struct FiberScheduler::Fiber {
  ThreadId thread = 0;
  std::function<void()> fn;
  ctx::fiber self;
  ctx::fiber sink;
  bool started = false;
  bool finished = false;
  std::exception_ptr error;
};

FiberScheduler::FiberScheduler(SimulatedNvm& nvm, Schedule schedule, std::uint64_t step_limit)
    : nvm_(nvm), schedule_(std::move(schedule)), step_limit_(step_limit), rng_(schedule_.seed) {
  auto& points = schedule_.crash_points;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
}

FiberScheduler::~FiberScheduler() { unwind_all(); }

bool FiberScheduler::crash_due() const {
  return crash_cursor_ < schedule_.crash_points.size() && schedule_.crash_points[crash_cursor_] <= step_;
}

void FiberScheduler::pick_slice(const std::vector<std::size_t>& runnable, std::size_t& index, std::uint32_t& steps) {
  if (schedule_.round_robin) {
    // Next runnable thread id after the previous one, wrapping around.
    std::size_t best = runnable.front();
    for (std::size_t i : runnable) {
      if (fibers_[i]->thread > rr_next_) {
        best = i;
        break;
      }
    }
    index = best;
    rr_next_ = fibers_[best]->thread;
    steps = 1;
    return;
  }
  while (slice_cursor_ < schedule_.slices.size()) {
    const Slice& slice = schedule_.slices[slice_cursor_++];
    for (std::size_t i : runnable) {
      if (fibers_[i]->thread == slice.thread) {
        index = i;
        steps = std::max<std::uint32_t>(1, slice.steps);
        return;
      }
    }
  }
  index = runnable[rng_() % runnable.size()];
  steps = 1 + static_cast<std::uint32_t>(rng_() % 8);
}

FiberScheduler::Outcome FiberScheduler::run(std::vector<Body> bodies, bool recovery_round) {
  unwind_all();
  recovery_round_ = recovery_round;
  stop_ = Stop::kNone;
  std::sort(bodies.begin(), bodies.end(), [](const Body& a, const Body& b) { return a.thread < b.thread; });
  for (Body& body : bodies) {
    auto fiber = std::make_unique<Fiber>();
    fiber->thread = body.thread;
    fiber->fn = std::move(body.fn);
    Fiber* f = fiber.get();
    f->self = ctx::fiber(std::allocator_arg, ctx::fixedsize_stack(kFiberStack), [f](ctx::fiber&& sink) {
      f->sink = std::move(sink);
      try {
        f->fn();
      } catch (const CrashSignal&) {
      } catch (const ctx::detail::forced_unwind&) {
        throw;
      } catch (...) {
        f->error = std::current_exception();
      }
      f->finished = true;
      return std::move(f->sink);
    });
    fibers_.push_back(std::move(fiber));
  }
  rr_next_ = 0;

  std::vector<std::size_t> runnable;
  for (;;) {
    runnable.clear();
    for (std::size_t i = 0; i < fibers_.size(); ++i) {
      if (!fibers_[i]->finished) runnable.push_back(i);
    }
    if (runnable.empty()) {
      fibers_.clear();
      return Outcome::kCompleted;
    }
    std::size_t index = 0;
    std::uint32_t steps = 1;
    pick_slice(runnable, index, steps);
    budget_ = steps;
    Fiber* f = fibers_[index].get();
    current_ = f;
    f->started = true;
    in_fiber_ = true;
    f->self = std::move(f->self).resume();
    in_fiber_ = false;
    current_ = nullptr;

    if (f->error) {
      std::exception_ptr error = f->error;
      unwind_all();
      std::rethrow_exception(error);
    }
    if (stop_ != Stop::kNone) {
      const Outcome outcome = stop_ == Stop::kCrash ? Outcome::kCrashed : Outcome::kStepLimit;
      if (stop_ == Stop::kCrash) ++crash_cursor_;
      unwind_all();
      return outcome;
    }
  }
}

void FiberScheduler::yield_to_scheduler() {
  Fiber* me = current_;
  me->sink = std::move(me->sink).resume();
}

void FiberScheduler::unwind_all() {
  unwinding_ = true;
  for (auto& fiber : fibers_) {
    if (fiber->started && !fiber->finished) {
      current_ = fiber.get();
      in_fiber_ = true;
      fiber->self = std::move(fiber->self).resume();
      in_fiber_ = false;
    }
  }
  current_ = nullptr;
  fibers_.clear();
  unwinding_ = false;
}

void FiberScheduler::before_access(ThreadId thread, Access access, PersistentAddress addr, Word value) {
  if (!in_fiber_) return;
  for (;;) {
    if (unwinding_) throw CrashSignal{};
    if (crash_due()) {
      stop_ = Stop::kCrash;
      yield_to_scheduler();
      continue;
    }
    if (step_ >= step_limit_) {
      stop_ = Stop::kLimit;
      yield_to_scheduler();
      continue;
    }
    if (budget_ == 0) {
      yield_to_scheduler();
      continue;
    }
    break;
  }
  --budget_;
  if (trace_ != nullptr) trace_->push_back(TraceEntry{step_, thread, access, addr, value, recovery_round_});
  ++step_;
}

}  // namespace dfc::harness

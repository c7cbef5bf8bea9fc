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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dfc {

using Word = std::uint64_t;
using ThreadId = std::uint32_t;

/// Raised on contract violations: bad addresses, double frees, corrupted
/// persistent state. Never used for ordinary control flow.
class Fault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct RegionId {
  std::uint32_t value = 0;
  friend bool operator==(RegionId, RegionId) = default;
};

struct PersistentAddress {
  RegionId region;
  std::size_t offset = 0;  // word index within the region
  friend bool operator==(const PersistentAddress&, const PersistentAddress&) = default;
};

struct CacheLineId {
  RegionId region;
  std::size_t line = 0;
  friend bool operator==(const CacheLineId&, const CacheLineId&) = default;
};

enum class Durability : std::uint8_t { kPersistent, kVolatile };

/// Legal crash outcomes. kPersistedOnly keeps exactly the fenced write-backs;
/// kAdversarialPrefix additionally lets every dirty line reach NVM in full;
/// kRandomized picks, per dirty line, a random prefix of its unfenced writes.
struct CrashPolicy {
  enum class Mode : std::uint8_t { kNone, kPersistedOnly, kAdversarialPrefix, kRandomized };

  Mode mode = Mode::kPersistedOnly;
  std::uint64_t seed = 0;

  static CrashPolicy none() { return {Mode::kNone, 0}; }
  static CrashPolicy persisted_only() { return {Mode::kPersistedOnly, 0}; }
  static CrashPolicy adversarial_prefix() { return {Mode::kAdversarialPrefix, 0}; }
  static CrashPolicy randomized(std::uint64_t seed) { return {Mode::kRandomized, seed}; }

  static std::optional<CrashPolicy> parse(std::string_view name, std::uint64_t seed = 0);
  std::string name() const;
};

enum class Access : std::uint8_t { kRead, kWrite, kCas, kPwb, kPfence, kPsync };

std::string_view to_string(Access access);

/// Called before every simulated memory access. A deterministic scheduler
/// installs one to interleave threads at access granularity and to inject
/// crashes; it may throw to abandon the calling thread.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void before_access(ThreadId thread, Access access, PersistentAddress addr, Word value) = 0;
  /// True when the calling OS thread is being driven by this observer.
  virtual bool drives_current_thread() const = 0;
};

struct PersistenceCounters {
  std::uint64_t pwb = 0;
  std::uint64_t pfence = 0;
  std::uint64_t psync = 0;

  PersistenceCounters& operator+=(const PersistenceCounters& other) {
    pwb += other.pwb;
    pfence += other.pfence;
    psync += other.psync;
    return *this;
  }
  friend PersistenceCounters operator-(PersistenceCounters a, const PersistenceCounters& b) {
    a.pwb -= b.pwb;
    a.pfence -= b.pfence;
    a.psync -= b.psync;
    return a;
  }
  friend bool operator==(const PersistenceCounters&, const PersistenceCounters&) = default;
};

struct MetricsSnapshot {
  std::vector<PersistenceCounters> per_thread;
  PersistenceCounters total;
};

/// Writes the flat counter record: `thread,pwb,pfence,psync`, one row per thread.
void write_counters_csv(std::ostream& out, const MetricsSnapshot& metrics);

struct NvmConfig {
  std::size_t line_bytes = 64;
  std::size_t max_threads = 64;
  /// Keep per-line logs of unfenced writes. Required by the eviction crash
  /// policies; costs a lock per write, so real-thread benchmarks disable it.
  bool track_history = true;
};

/// Word-addressed memory under explicit epoch persistency.
///
/// Every region has a cache image (what threads read and write) and, when
/// persistent, a persisted image (what survives a crash). `pwb` snapshots a
/// whole cache line into the issuing thread's pending set; `pfence` commits
/// that set, acting as pfence+psync. Line snapshots carry the global write
/// sequence number at the time of the `pwb` so that a stale snapshot never
/// overwrites a newer persisted one.
class SimulatedNvm {
 public:
  explicit SimulatedNvm(NvmConfig config = {});
  ~SimulatedNvm();

  SimulatedNvm(const SimulatedNvm&) = delete;
  SimulatedNvm& operator=(const SimulatedNvm&) = delete;

  /// Creates a zero-filled region, or returns the existing one of the same
  /// name (re-attach after a crash). Size or durability mismatches fault.
  RegionId open_region(std::string_view name, std::size_t words, Durability durability);
  std::optional<RegionId> find_region(std::string_view name) const;
  std::size_t region_words(RegionId region) const;
  Durability region_durability(RegionId region) const;

  void mem_write(PersistentAddress addr, Word value, ThreadId thread);
  Word mem_read(PersistentAddress addr, ThreadId thread);
  bool compare_exchange(PersistentAddress addr, Word expected, Word desired, ThreadId thread);
  void pwb(PersistentAddress addr, ThreadId thread);
  void pfence(ThreadId thread);
  void psync(ThreadId thread);

  /// Marks one iteration of a spin loop. Yields the OS thread unless a step
  /// observer is driving the caller (then the loop's reads already yield).
  void relax(ThreadId thread) const;

  void simulate_crash(const CrashPolicy& policy);

  MetricsSnapshot metrics_snapshot() const;
  PersistenceCounters thread_counters(ThreadId thread) const;

  /// Harness-side inspection; never counted and never observed.
  Word peek(PersistentAddress addr) const;
  Word peek_persisted(PersistentAddress addr) const;
  /// True if the line has writes that are not yet in the persisted image.
  bool line_dirty(CacheLineId line) const;

  CacheLineId line_of(PersistentAddress addr) const;
  std::size_t words_per_line() const { return words_per_line_; }
  std::size_t line_bytes() const { return config_.line_bytes; }
  std::size_t max_threads() const { return config_.max_threads; }
  std::uint64_t crash_count() const { return crash_count_; }
  bool tracks_history() const { return config_.track_history; }

  void set_observer(StepObserver* observer) { observer_ = observer; }
  StepObserver* observer() const { return observer_; }

 private:
  struct LogEntry {
    std::uint64_t seq;
    std::uint32_t word_in_line;
    Word value;
  };
  struct Line {
    std::uint64_t persisted_seq = 0;
    std::vector<LogEntry> log;
  };
  struct Region {
    std::string name;
    Durability durability;
    std::unique_ptr<std::atomic<Word>[]> cache;
    std::vector<Word> persisted;
    std::vector<Line> lines;
    std::size_t words = 0;
  };
  struct LineSnapshot {
    CacheLineId line;
    std::uint64_t seq;
    std::vector<Word> words;
  };
  struct ThreadState {
    std::vector<LineSnapshot> pending;
    std::atomic<std::uint64_t> pwb{0};
    std::atomic<std::uint64_t> pfence{0};
    std::atomic<std::uint64_t> psync{0};
  };

  Region& region_for(PersistentAddress addr);
  const Region& region_for(PersistentAddress addr) const;
  ThreadState& thread_state(ThreadId thread);
  void notify(ThreadId thread, Access access, PersistentAddress addr, Word value);
  void record_write(Region& region, PersistentAddress addr, Word value);
  void commit_pending(ThreadState& state);
  void evict_prefix(Region& region, std::size_t line, std::size_t count);

  NvmConfig config_;
  std::size_t words_per_line_;
  std::vector<std::unique_ptr<Region>> regions_;
  std::vector<std::unique_ptr<ThreadState>> threads_;
  std::atomic<std::uint64_t> write_seq_{0};
  mutable std::mutex persist_mutex_;
  StepObserver* observer_ = nullptr;
  std::uint64_t crash_count_ = 0;
};

}  // namespace dfc

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
#include "dfc/nvm.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <random>
#include <thread>

namespace dfc {

std::optional<CrashPolicy> CrashPolicy::parse(std::string_view name, std::uint64_t seed) {
  if (name == "none") return none();
  if (name == "persisted-only") return persisted_only();
  if (name == "adversarial-prefix") return adversarial_prefix();
  if (name == "randomized") return randomized(seed);
  return std::nullopt;
}

std::string CrashPolicy::name() const {
  switch (mode) {
    case Mode::kNone:
      return "none";
    case Mode::kPersistedOnly:
      return "persisted-only";
    case Mode::kAdversarialPrefix:
      return "adversarial-prefix";
    case Mode::kRandomized:
      return "randomized";
  }
  return "unknown";
}

std::string_view to_string(Access access) {
  switch (access) {
    case Access::kRead:
      return "read";
    case Access::kWrite:
      return "write";
    case Access::kCas:
      return "cas";
    case Access::kPwb:
      return "pwb";
    case Access::kPfence:
      return "pfence";
    case Access::kPsync:
      return "psync";
  }
  return "?";
}

void write_counters_csv(std::ostream& out, const MetricsSnapshot& metrics) {
  out << "thread,pwb,pfence,psync\n";
  for (std::size_t t = 0; t < metrics.per_thread.size(); ++t) {
    const auto& c = metrics.per_thread[t];
    out << t << ',' << c.pwb << ',' << c.pfence << ',' << c.psync << '\n';
  }
}

SimulatedNvm::SimulatedNvm(NvmConfig config) : config_(config) {
  if (config_.line_bytes < 32 || !std::has_single_bit(config_.line_bytes)) {
    throw Fault("line size must be a power of two of at least 32 bytes");
  }
  if (config_.max_threads == 0) throw Fault("max_threads must be positive");
  words_per_line_ = config_.line_bytes / sizeof(Word);
  threads_.reserve(config_.max_threads);
  for (std::size_t i = 0; i < config_.max_threads; ++i) {
    threads_.push_back(std::make_unique<ThreadState>());
  }
}

SimulatedNvm::~SimulatedNvm() = default;

RegionId SimulatedNvm::open_region(std::string_view name, std::size_t words, Durability durability) {
  if (words == 0) throw Fault("region must not be empty");
  if (auto existing = find_region(name)) {
    const Region& r = *regions_[existing->value];
    if (r.words != words || r.durability != durability) {
      throw Fault("region '" + std::string(name) + "' re-opened with a different shape");
    }
    return *existing;
  }
  auto region = std::make_unique<Region>();
  region->name = std::string(name);
  region->durability = durability;
  region->words = words;
  region->cache = std::make_unique<std::atomic<Word>[]>(words);
  for (std::size_t i = 0; i < words; ++i) region->cache[i].store(0, std::memory_order_relaxed);
  if (durability == Durability::kPersistent) {
    region->persisted.assign(words, 0);
    region->lines.resize((words + words_per_line_ - 1) / words_per_line_);
  }
  regions_.push_back(std::move(region));
  return RegionId{static_cast<std::uint32_t>(regions_.size() - 1)};
}

std::optional<RegionId> SimulatedNvm::find_region(std::string_view name) const {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i]->name == name) return RegionId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

std::size_t SimulatedNvm::region_words(RegionId region) const {
  if (region.value >= regions_.size()) throw Fault("unknown region");
  return regions_[region.value]->words;
}

Durability SimulatedNvm::region_durability(RegionId region) const {
  if (region.value >= regions_.size()) throw Fault("unknown region");
  return regions_[region.value]->durability;
}

SimulatedNvm::Region& SimulatedNvm::region_for(PersistentAddress addr) {
  return const_cast<Region&>(std::as_const(*this).region_for(addr));
}

const SimulatedNvm::Region& SimulatedNvm::region_for(PersistentAddress addr) const {
  if (addr.region.value >= regions_.size()) throw Fault("address in unknown region");
  const Region& r = *regions_[addr.region.value];
  if (addr.offset >= r.words) {
    throw Fault("address " + std::to_string(addr.offset) + " out of range for region '" + r.name + "'");
  }
  return r;
}

SimulatedNvm::ThreadState& SimulatedNvm::thread_state(ThreadId thread) {
  if (thread >= threads_.size()) throw Fault("thread id " + std::to_string(thread) + " out of range");
  return *threads_[thread];
}

CacheLineId SimulatedNvm::line_of(PersistentAddress addr) const {
  region_for(addr);
  return CacheLineId{addr.region, addr.offset / words_per_line_};
}

void SimulatedNvm::notify(ThreadId thread, Access access, PersistentAddress addr, Word value) {
  if (observer_ != nullptr) observer_->before_access(thread, access, addr, value);
}

void SimulatedNvm::record_write(Region& region, PersistentAddress addr, Word value) {
  const std::uint64_t seq = write_seq_.fetch_add(1, std::memory_order_acq_rel) + 1;
  if (region.durability == Durability::kPersistent && config_.track_history) {
    std::lock_guard lock(persist_mutex_);
    region.lines[addr.offset / words_per_line_].log.push_back(
        LogEntry{seq, static_cast<std::uint32_t>(addr.offset % words_per_line_), value});
  }
}

void SimulatedNvm::mem_write(PersistentAddress addr, Word value, ThreadId thread) {
  Region& region = region_for(addr);
  thread_state(thread);
  notify(thread, Access::kWrite, addr, value);
  region.cache[addr.offset].store(value, std::memory_order_seq_cst);
  record_write(region, addr, value);
}

Word SimulatedNvm::mem_read(PersistentAddress addr, ThreadId thread) {
  const Region& region = region_for(addr);
  thread_state(thread);
  notify(thread, Access::kRead, addr, 0);
  return region.cache[addr.offset].load(std::memory_order_seq_cst);
}

bool SimulatedNvm::compare_exchange(PersistentAddress addr, Word expected, Word desired, ThreadId thread) {
  Region& region = region_for(addr);
  thread_state(thread);
  notify(thread, Access::kCas, addr, desired);
  if (!region.cache[addr.offset].compare_exchange_strong(expected, desired, std::memory_order_seq_cst)) {
    return false;
  }
  record_write(region, addr, desired);
  return true;
}

void SimulatedNvm::pwb(PersistentAddress addr, ThreadId thread) {
  Region& region = region_for(addr);
  ThreadState& state = thread_state(thread);
  notify(thread, Access::kPwb, addr, 0);
  state.pwb.fetch_add(1, std::memory_order_relaxed);
  if (region.durability != Durability::kPersistent) return;

  const std::size_t line = addr.offset / words_per_line_;
  const std::size_t first = line * words_per_line_;
  const std::size_t last = std::min(first + words_per_line_, region.words);
  LineSnapshot snap{CacheLineId{addr.region, line}, write_seq_.load(std::memory_order_acquire), {}};
  snap.words.reserve(last - first);
  for (std::size_t w = first; w < last; ++w) snap.words.push_back(region.cache[w].load(std::memory_order_seq_cst));
  state.pending.push_back(std::move(snap));
}

void SimulatedNvm::commit_pending(ThreadState& state) {
  std::lock_guard lock(persist_mutex_);
  for (auto& snap : state.pending) {
    Region& region = *regions_[snap.line.region.value];
    Line& line = region.lines[snap.line.line];
    if (snap.seq <= line.persisted_seq) continue;
    const std::size_t first = snap.line.line * words_per_line_;
    std::copy(snap.words.begin(), snap.words.end(), region.persisted.begin() + static_cast<std::ptrdiff_t>(first));
    line.persisted_seq = snap.seq;
    std::erase_if(line.log, [&](const LogEntry& e) { return e.seq <= snap.seq; });
  }
  state.pending.clear();
}

void SimulatedNvm::pfence(ThreadId thread) {
  ThreadState& state = thread_state(thread);
  notify(thread, Access::kPfence, PersistentAddress{}, 0);
  state.pfence.fetch_add(1, std::memory_order_relaxed);
  commit_pending(state);
}

void SimulatedNvm::psync(ThreadId thread) {
  ThreadState& state = thread_state(thread);
  notify(thread, Access::kPsync, PersistentAddress{}, 0);
  state.psync.fetch_add(1, std::memory_order_relaxed);
  commit_pending(state);
}

void SimulatedNvm::relax(ThreadId /*thread*/) const {
  if (observer_ == nullptr || !observer_->drives_current_thread()) std::this_thread::yield();
}

void SimulatedNvm::evict_prefix(Region& region, std::size_t line, std::size_t count) {
  Line& l = region.lines[line];
  const std::size_t first = line * words_per_line_;
  for (std::size_t i = 0; i < count; ++i) {
    region.persisted[first + l.log[i].word_in_line] = l.log[i].value;
  }
  if (count > 0) l.persisted_seq = l.log[count - 1].seq;
}

void SimulatedNvm::simulate_crash(const CrashPolicy& policy) {
  if (policy.mode == CrashPolicy::Mode::kNone) throw Fault("crash policy 'none' forbids crashes");
  if (policy.mode != CrashPolicy::Mode::kPersistedOnly && !config_.track_history) {
    throw Fault("eviction crash policies need write-history tracking");
  }
  std::lock_guard lock(persist_mutex_);
  std::mt19937_64 rng(policy.seed);
  for (auto& region : regions_) {
    if (region->durability != Durability::kPersistent) continue;
    for (std::size_t line = 0; line < region->lines.size(); ++line) {
      const std::size_t n = region->lines[line].log.size();
      if (n == 0) continue;
      switch (policy.mode) {
        case CrashPolicy::Mode::kAdversarialPrefix:
          evict_prefix(*region, line, n);
          break;
        case CrashPolicy::Mode::kRandomized:
          evict_prefix(*region, line, std::uniform_int_distribution<std::size_t>(0, n)(rng));
          break;
        default:
          break;
      }
    }
  }
  for (auto& region : regions_) {
    const bool persistent = region->durability == Durability::kPersistent;
    for (std::size_t w = 0; w < region->words; ++w) {
      region->cache[w].store(persistent ? region->persisted[w] : 0, std::memory_order_relaxed);
    }
    for (auto& line : region->lines) line.log.clear();
  }
  for (auto& t : threads_) t->pending.clear();
  ++crash_count_;
}

MetricsSnapshot SimulatedNvm::metrics_snapshot() const {
  MetricsSnapshot m;
  m.per_thread.reserve(threads_.size());
  for (const auto& t : threads_) {
    PersistenceCounters c{t->pwb.load(std::memory_order_relaxed), t->pfence.load(std::memory_order_relaxed),
                          t->psync.load(std::memory_order_relaxed)};
    m.total += c;
    m.per_thread.push_back(c);
  }
  return m;
}

PersistenceCounters SimulatedNvm::thread_counters(ThreadId thread) const {
  if (thread >= threads_.size()) throw Fault("thread id out of range");
  const auto& t = *threads_[thread];
  return {t.pwb.load(std::memory_order_relaxed), t.pfence.load(std::memory_order_relaxed),
          t.psync.load(std::memory_order_relaxed)};
}

Word SimulatedNvm::peek(PersistentAddress addr) const {
  return region_for(addr).cache[addr.offset].load(std::memory_order_seq_cst);
}

Word SimulatedNvm::peek_persisted(PersistentAddress addr) const {
  const Region& r = region_for(addr);
  if (r.durability != Durability::kPersistent) return 0;
  std::lock_guard lock(persist_mutex_);
  return r.persisted[addr.offset];
}

bool SimulatedNvm::line_dirty(CacheLineId line) const {
  const Region& r = region_for(PersistentAddress{line.region, line.line * words_per_line_});
  if (r.durability != Durability::kPersistent) return false;
  std::lock_guard lock(persist_mutex_);
  const std::size_t first = line.line * words_per_line_;
  const std::size_t last = std::min(first + words_per_line_, r.words);
  for (std::size_t w = first; w < last; ++w) {
    if (r.cache[w].load(std::memory_order_relaxed) != r.persisted[w]) return true;
  }
  return false;
}

}  // namespace dfc

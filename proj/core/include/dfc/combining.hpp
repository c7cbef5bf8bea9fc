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
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dfc/node_pool.hpp"
#include "dfc/nvm.hpp"
#include "dfc/types.hpp"

namespace dfc {

struct ThreadCtx {
  std::uint32_t id = 0;  // 1-based slot in the announcement array
};

struct CombinerConfig {
  std::size_t threads = 8;
  std::size_t pool_capacity = NodePool::kDefaultCapacity;
  /// Prefix of the NVM region names; two objects in one NVM need distinct names.
  std::string name = "dfc";
};

/// Word offsets of one announcement record. All four share a cache line.
enum class AnnounceField : std::size_t { kVal = 0, kEpoch = 1, kParam = 2, kName = 3 };

/// Bits of the per-thread `valid` word.
inline constexpr Word kValidIndexBit = 1;  // which announcement record is active
inline constexpr Word kValidReadyBit = 2;  // the active record may be collected

/// Persistent and volatile layout shared by the stack, queue and deque.
///
///   <name>.root   persistent  line 0: cEpoch
///                             line 1: top[0], top[1]
///                             line 2: bot[0], bot[1]
///   <name>.ann    persistent  slot i (1-based) spans three lines starting
///                             at (i-1)*3 lines: valid | ann[0] | ann[1]
///   <name>.shared volatile    line 0: cLock, line 1: rLock,
///                             then vColl[N], then the operation lists
///                             (list k occupies N words)
///   <name>.nodes  persistent  see NodePool
class ProtocolLayout {
 public:
  enum class Role : std::uint8_t {
    kEpoch,
    kTop,
    kBot,
    kValid,
    kAnnounce,
    kCombinerLock,
    kRecoveryLock,
    kCollected,
    kList,
    kNode,
    kOther,
  };
  struct Classified {
    Role role = Role::kOther;
    std::uint32_t slot = 0;  // for kValid / kAnnounce / kCollected
    std::uint32_t buffer = 0;
    AnnounceField field = AnnounceField::kVal;
  };

  ProtocolLayout(SimulatedNvm& nvm, const std::string& name, std::size_t threads, std::size_t lists);

  PersistentAddress epoch() const { return {root_, 0}; }
  PersistentAddress top(std::size_t index) const { return {root_, wpl_ + index}; }
  PersistentAddress bot(std::size_t index) const { return {root_, 2 * wpl_ + index}; }
  PersistentAddress valid(std::uint32_t slot) const { return {ann_, slot_base(slot)}; }
  PersistentAddress announce(std::uint32_t slot, std::size_t buffer, AnnounceField field) const {
    return {ann_, slot_base(slot) + (1 + buffer) * wpl_ + static_cast<std::size_t>(field)};
  }
  PersistentAddress combiner_lock() const { return {shared_, 0}; }
  PersistentAddress recovery_lock() const { return {shared_, wpl_}; }
  PersistentAddress collected(std::uint32_t slot) const { return {shared_, 2 * wpl_ + (slot - 1)}; }
  PersistentAddress list(std::size_t list, std::size_t index) const {
    return {shared_, 2 * wpl_ + threads_ + list * threads_ + index};
  }

  Classified classify(PersistentAddress addr, RegionId nodes) const;

  std::size_t threads() const { return threads_; }

 private:
  std::size_t slot_base(std::uint32_t slot) const { return (slot - 1) * 3 * wpl_; }

  std::size_t wpl_;
  std::size_t threads_;
  RegionId root_;
  RegionId ann_;
  RegionId shared_;
};

/// One operation gathered by the combiner's scan.
struct CollectedOp {
  std::uint32_t slot = 0;
  std::uint32_t buffer = 0;
  OpName name = OpName::kNone;
};

/// Summary of one combining phase, published to an optional listener.
/// `reduce_result` is structure specific: stack {signed surplus, 0},
/// queue {last enqueue index, last dequeue index} (-1 when absent),
/// deque {signed front surplus, signed rear surplus}.
struct PhaseRecord {
  Word epoch = 0;
  ThreadId combiner = 0;
  bool recovery = false;
  std::vector<CollectedOp> collected;
  std::array<std::int64_t, 2> reduce_result{0, 0};
  std::size_t eliminated_pairs = 0;
  std::size_t allocations = 0;
  std::size_t frees = 0;
  std::vector<NodeHandle> allocated;
  std::size_t pool_full = 0;
  std::size_t nodes_flushed = 0;
  std::size_t roots_flushed = 0;
  PersistenceCounters combiner_cost;  // measured on the combiner's own counters
};

struct ProtocolStats {
  std::uint64_t announced = 0;
  std::uint64_t phases = 0;
  std::uint64_t recovery_phases = 0;
  std::uint64_t collected = 0;
  std::uint64_t allocations = 0;
  std::uint64_t nodes_flushed = 0;
  std::uint64_t roots_flushed = 0;
  std::uint64_t eliminated_pairs = 0;
  std::uint64_t late_arrivals = 0;
  std::uint64_t max_late_per_op = 0;
  PersistenceCounters announce_cost;
  PersistenceCounters combiner_cost;
  PersistenceCounters recovery_cost;  // parity repair only; the recovery phase is in combiner_cost
};

/// Handle returned by the announcement half of an operation.
struct Ticket {
  std::uint32_t buffer = 0;
  Word op_epoch = 0;
};

/// The detectable flat-combining protocol: announcement, combiner election,
/// the waiting rule of non-combiners, the double epoch increment and the
/// recovery procedure. Subclasses provide the sequential part of a phase
/// (reduce or collect, then apply the surplus to the linked list).
///
/// Every cross-thread signal goes through the simulated memory. Constructing
/// an object over an NVM that already holds its regions re-attaches to the
/// persisted image; `recover` must then run on every thread before new ops.
class DetectableCombiner {
 public:
  virtual ~DetectableCombiner() = default;

  DetectableCombiner(const DetectableCombiner&) = delete;
  DetectableCombiner& operator=(const DetectableCombiner&) = delete;

  ThreadCtx register_thread();

  Response execute(ThreadCtx ctx, OpName name, Word param);
  /// Split form of `execute`: publish the announcement, then wait for (or
  /// compute, as combiner) its response.
  Ticket announce(ThreadCtx ctx, OpName name, Word param);
  Response await_response(ThreadCtx ctx, Ticket ticket);

  Response recover(ThreadCtx ctx);

  virtual StructureKind kind() const = 0;
  /// Quiescent snapshot of the live values (front/top first), read without
  /// counting steps. Faults if the linked structure is inconsistent.
  virtual std::vector<Word> contents() const = 0;

  std::size_t threads() const { return threads_; }
  const ProtocolLayout& layout() const { return layout_; }
  NodePool& pool() { return pool_; }
  const NodePool& pool() const { return pool_; }
  SimulatedNvm& nvm() const { return nvm_; }

  void set_phase_listener(std::function<void(const PhaseRecord&)> listener) { listener_ = std::move(listener); }
  ProtocolStats stats() const;

  /// Harness inspection helpers (no steps).
  Word peek_epoch() const { return nvm_.peek(layout_.epoch()); }
  Word peek_valid(std::uint32_t slot) const { return nvm_.peek(layout_.valid(slot)); }
  Word peek_announce(std::uint32_t slot, std::size_t buffer, AnnounceField field) const {
    return nvm_.peek(layout_.announce(slot, buffer, field));
  }
  ProtocolLayout::Classified classify(PersistentAddress addr) const { return layout_.classify(addr, pool_region()); }
  /// Live segment under the active roots. An odd epoch counts as the
  /// completed phase, as recovery would treat it.
  std::vector<NodeChain> peek_live_chains() const;
  std::vector<NodeHandle> peek_live_nodes() const;

 protected:
  enum class Root : std::uint8_t { kTop, kBot };

  DetectableCombiner(SimulatedNvm& nvm, const CombinerConfig& config, std::size_t root_pairs, std::size_t lists);

  struct PhaseWork {
    std::vector<NodeHandle> dirty;
    std::vector<NodeHandle> to_free;
    std::vector<NodeHandle> allocated;
    std::size_t eliminated_pairs = 0;
    std::size_t pool_full = 0;
    std::array<std::int64_t, 2> reduce_result{0, 0};

    void mark_dirty(NodeHandle node);
  };

  virtual bool accepts(OpName name) const = 0;
  /// Runs the structure-specific body of a phase for `epoch`: fills the
  /// responses of every collected op and writes the next root entries.
  virtual void apply_phase(ThreadId t, Word epoch, std::span<const CollectedOp> collected, PhaseWork& work) = 0;
  /// Live node chains under the active root entries of `epoch`.
  virtual std::vector<NodeChain> live_chains(ThreadId t, Word epoch) = 0;

  static std::size_t active_index(Word epoch) { return (epoch / 2) % 2; }
  static std::size_t next_index(Word epoch) { return (epoch / 2 + 1) % 2; }
  static Word even_ceiling(Word epoch) { return epoch + (epoch & 1U); }
  std::size_t peek_active_index() const { return active_index(even_ceiling(peek_epoch())); }

  NodeHandle read_root(ThreadId t, Root root, std::size_t index);
  void write_root(ThreadId t, Root root, std::size_t index, NodeHandle node);
  NodeHandle peek_root(Root root, std::size_t index) const;
  Word read_param(ThreadId t, const CollectedOp& op);
  void respond(ThreadId t, const CollectedOp& op, Response response);
  void list_write(ThreadId t, std::size_t list, std::size_t index, std::uint32_t slot);
  CollectedOp list_read(ThreadId t, std::size_t list, std::size_t index);

  SimulatedNvm& nvm_;

 private:
  RegionId pool_region() const;
  std::vector<CollectedOp> scan(ThreadId t, Word epoch);
  void combine(ThreadId t, bool recovery);

  std::size_t threads_;
  std::size_t root_pairs_;
  ProtocolLayout layout_;
  NodePool pool_;
  std::atomic<std::uint32_t> registered_{0};
  std::function<void(const PhaseRecord&)> listener_;

  struct AtomicStats {
    std::atomic<std::uint64_t> announced{0}, phases{0}, recovery_phases{0}, collected{0}, allocations{0},
        nodes_flushed{0}, roots_flushed{0}, eliminated_pairs{0}, late_arrivals{0}, max_late_per_op{0};
    std::atomic<std::uint64_t> announce_pwb{0}, announce_pfence{0}, combiner_pwb{0}, combiner_pfence{0},
        recovery_pwb{0}, recovery_pfence{0};
  };
  AtomicStats stats_;
};

}  // namespace dfc

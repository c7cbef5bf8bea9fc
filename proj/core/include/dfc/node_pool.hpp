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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "dfc/nvm.hpp"

namespace dfc {

/// Index of a node in the pool. Stored in persistent words as index + 1 so
/// that zero-initialized memory reads as "no node".
class NodeHandle {
 public:
  constexpr NodeHandle() = default;
  static constexpr NodeHandle none() { return NodeHandle{}; }
  static constexpr NodeHandle at(std::size_t index) { return NodeHandle{static_cast<Word>(index) + 1}; }
  static constexpr NodeHandle from_word(Word w) { return NodeHandle{w}; }

  constexpr bool is_none() const { return encoded_ == 0; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(encoded_ - 1); }
  constexpr Word to_word() const { return encoded_; }

  friend constexpr bool operator==(NodeHandle, NodeHandle) = default;

 private:
  constexpr explicit NodeHandle(Word encoded) : encoded_(encoded) {}
  Word encoded_ = 0;
};

/// A linked segment for reachability marking: walk `next` from `head` until
/// `tail` (inclusive). A none tail means "until next is none".
struct NodeChain {
  NodeHandle head;
  NodeHandle tail;
};

/// Fixed-capacity persistent node arena. Nodes live in a persistent region,
/// one cache line each: {param, next, prev}. The free map is a volatile
/// two-level bitmap (one root word over 64 leaf words, a set leaf bit meaning
/// "used") that is rebuilt from the live structure by `garbage_collect`.
///
/// Only the combiner touches the pool, so nothing here is synchronized.
class NodePool {
 public:
  static constexpr std::size_t kMaxCapacity = 64 * 64;
  static constexpr std::size_t kDefaultCapacity = kMaxCapacity;

  enum Field : std::size_t { kParam = 0, kNext = 1, kPrev = 2 };

  /// Opens (or re-attaches to) the node region `<name>.nodes`. A fresh pool
  /// has every node free. A re-attached pool refuses allocations until
  /// `garbage_collect` has rebuilt the bitmap.
  NodePool(SimulatedNvm& nvm, std::string_view name, std::size_t capacity);

  std::optional<NodeHandle> allocate(ThreadId thread, Word param, NodeHandle next,
                                     NodeHandle prev = NodeHandle::none());
  void deallocate(NodeHandle node);

  /// Marks exactly the nodes reachable through the chains as used. Faults on
  /// cycles, broken chains and out-of-range handles.
  std::size_t garbage_collect(ThreadId thread, std::span<const NodeChain> roots);

  Word param(ThreadId thread, NodeHandle node);
  NodeHandle next(ThreadId thread, NodeHandle node);
  NodeHandle prev(ThreadId thread, NodeHandle node);
  void set_next(ThreadId thread, NodeHandle node, NodeHandle next);
  void set_prev(ThreadId thread, NodeHandle node, NodeHandle prev);
  void persist(ThreadId thread, NodeHandle node);

  PersistentAddress address(NodeHandle node, Field field = kParam) const;
  bool contains(PersistentAddress addr) const { return addr.region == region_; }

  std::size_t capacity() const { return capacity_; }
  std::size_t free_count() const { return capacity_ - used_; }
  std::size_t used_count() const { return used_; }
  bool is_used(NodeHandle node) const;
  bool ready() const { return ready_; }

  std::uint64_t root_word() const { return root_; }
  std::uint64_t leaf_word(std::size_t i) const { return leaves_.at(i); }
  /// Root summary agrees with the leaves and the used count with the bits.
  bool bitmap_consistent() const;

  /// Walks a chain without counting steps (harness inspection).
  std::size_t peek_chain_length(NodeChain chain) const;

 private:
  void check(NodeHandle node) const;
  void reset_bitmap();
  void set_used(std::size_t index, bool used);

  SimulatedNvm& nvm_;
  RegionId region_;
  std::size_t capacity_;
  std::size_t stride_;
  std::uint64_t root_ = 0;
  std::array<std::uint64_t, 64> leaves_{};
  std::size_t used_ = 0;
  bool ready_ = true;
};

}  // namespace dfc

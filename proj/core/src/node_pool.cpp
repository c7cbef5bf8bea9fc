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
#include "dfc/node_pool.hpp"

#include <bit>
#include <string>

namespace dfc {

namespace {

constexpr std::uint64_t kAllOnes = ~std::uint64_t{0};

}  // namespace

NodePool::NodePool(SimulatedNvm& nvm, std::string_view name, std::size_t capacity)
    : nvm_(nvm), capacity_(capacity) {
  if (capacity == 0) throw Fault("node pool capacity must be positive");
  if (capacity > kMaxCapacity) throw Fault("node pool capacity exceeds the two-level bitmap");
  // One node per cache line so that a single pwb covers a node.
  stride_ = nvm.words_per_line();
  const std::string region_name = std::string(name) + ".nodes";
  const bool existed = nvm.find_region(region_name).has_value();
  region_ = nvm.open_region(region_name, capacity * stride_, Durability::kPersistent);
  reset_bitmap();
  ready_ = !existed;
}

void NodePool::reset_bitmap() {
  leaves_.fill(kAllOnes);
  root_ = 0;
  for (std::size_t leaf = 0; leaf * 64 < capacity_; ++leaf) {
    const std::size_t bits = std::min<std::size_t>(64, capacity_ - leaf * 64);
    leaves_[leaf] = bits == 64 ? 0 : (kAllOnes << bits);
    root_ |= std::uint64_t{1} << leaf;
  }
  used_ = 0;
}

void NodePool::set_used(std::size_t index, bool used) {
  const std::size_t leaf = index / 64;
  const std::uint64_t bit = std::uint64_t{1} << (index % 64);
  if (used) {
    leaves_[leaf] |= bit;
    ++used_;
  } else {
    leaves_[leaf] &= ~bit;
    --used_;
  }
  if (leaves_[leaf] == kAllOnes) {
    root_ &= ~(std::uint64_t{1} << leaf);
  } else {
    root_ |= std::uint64_t{1} << leaf;
  }
}

void NodePool::check(NodeHandle node) const {
  if (node.is_none() || node.index() >= capacity_) {
    throw Fault("node handle " + std::to_string(node.to_word()) + " outside the pool");
  }
}

PersistentAddress NodePool::address(NodeHandle node, Field field) const {
  check(node);
  return PersistentAddress{region_, node.index() * stride_ + field};
}

bool NodePool::is_used(NodeHandle node) const {
  check(node);
  return (leaves_[node.index() / 64] >> (node.index() % 64)) & 1U;
}

std::optional<NodeHandle> NodePool::allocate(ThreadId thread, Word param, NodeHandle next, NodeHandle prev) {
  if (!ready_) throw Fault("node pool used before recovery garbage collection");
  if (root_ == 0) return std::nullopt;
  const std::size_t leaf = static_cast<std::size_t>(std::countr_zero(root_));
  const std::size_t bit = static_cast<std::size_t>(std::countr_one(leaves_[leaf]));
  const std::size_t index = leaf * 64 + bit;
  set_used(index, true);
  const NodeHandle node = NodeHandle::at(index);
  nvm_.mem_write(address(node, kParam), param, thread);
  nvm_.mem_write(address(node, kNext), next.to_word(), thread);
  nvm_.mem_write(address(node, kPrev), prev.to_word(), thread);
  return node;
}

void NodePool::deallocate(NodeHandle node) {
  if (!is_used(node)) throw Fault("double free of node " + std::to_string(node.index()));
  set_used(node.index(), false);
}

std::size_t NodePool::garbage_collect(ThreadId thread, std::span<const NodeChain> roots) {
  reset_bitmap();
  ready_ = true;
  for (const NodeChain& chain : roots) {
    NodeHandle cur = chain.head;
    while (!cur.is_none()) {
      if (is_used(cur)) throw Fault("cycle or shared suffix in node chain at " + std::to_string(cur.index()));
      set_used(cur.index(), true);
      if (cur == chain.tail) break;
      cur = next(thread, cur);
    }
    if (cur.is_none() && !chain.tail.is_none()) throw Fault("node chain ends before its tail");
  }
  return used_;
}

Word NodePool::param(ThreadId thread, NodeHandle node) { return nvm_.mem_read(address(node, kParam), thread); }

NodeHandle NodePool::next(ThreadId thread, NodeHandle node) {
  return NodeHandle::from_word(nvm_.mem_read(address(node, kNext), thread));
}

NodeHandle NodePool::prev(ThreadId thread, NodeHandle node) {
  return NodeHandle::from_word(nvm_.mem_read(address(node, kPrev), thread));
}

void NodePool::set_next(ThreadId thread, NodeHandle node, NodeHandle next) {
  nvm_.mem_write(address(node, kNext), next.to_word(), thread);
}

void NodePool::set_prev(ThreadId thread, NodeHandle node, NodeHandle prev) {
  nvm_.mem_write(address(node, kPrev), prev.to_word(), thread);
}

void NodePool::persist(ThreadId thread, NodeHandle node) { nvm_.pwb(address(node), thread); }

bool NodePool::bitmap_consistent() const {
  std::size_t used = 0;
  for (std::size_t leaf = 0; leaf < 64; ++leaf) {
    const bool has_free = leaves_[leaf] != kAllOnes;
    if (has_free != static_cast<bool>((root_ >> leaf) & 1U)) return false;
    const std::size_t valid_bits = leaf * 64 >= capacity_ ? 0 : std::min<std::size_t>(64, capacity_ - leaf * 64);
    const std::uint64_t mask = valid_bits == 64 ? kAllOnes : ((std::uint64_t{1} << valid_bits) - 1);
    used += static_cast<std::size_t>(std::popcount(leaves_[leaf] & mask));
    if ((leaves_[leaf] | mask) != kAllOnes) return false;
  }
  return used == used_;
}

std::size_t NodePool::peek_chain_length(NodeChain chain) const {
  std::size_t n = 0;
  NodeHandle cur = chain.head;
  while (!cur.is_none()) {
    if (++n > capacity_) throw Fault("cycle in node chain");
    if (cur == chain.tail) break;
    cur = NodeHandle::from_word(nvm_.peek(address(cur, kNext)));
  }
  return n;
}

}  // namespace dfc

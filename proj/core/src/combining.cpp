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
#include "dfc/combining.hpp"

#include <algorithm>
#include <string>

namespace dfc {

namespace {

void atomic_max(std::atomic<std::uint64_t>& target, std::uint64_t value) {
  std::uint64_t cur = target.load(std::memory_order_relaxed);
  while (cur < value && !target.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
  }
}

}  // namespace

ProtocolLayout::ProtocolLayout(SimulatedNvm& nvm, const std::string& name, std::size_t threads, std::size_t lists)
    : wpl_(nvm.words_per_line()), threads_(threads) {
  if (wpl_ < 4) throw Fault("cache line too small for an announcement record");
  root_ = nvm.open_region(name + ".root", 3 * wpl_, Durability::kPersistent);
  ann_ = nvm.open_region(name + ".ann", threads * 3 * wpl_, Durability::kPersistent);
  shared_ = nvm.open_region(name + ".shared", 2 * wpl_ + threads + lists * threads, Durability::kVolatile);
}

ProtocolLayout::Classified ProtocolLayout::classify(PersistentAddress addr, RegionId nodes) const {
  Classified out;
  if (addr.region == root_) {
    if (addr.offset < wpl_) {
      out.role = Role::kEpoch;
    } else if (addr.offset < 2 * wpl_) {
      out.role = Role::kTop;
      out.buffer = static_cast<std::uint32_t>(addr.offset - wpl_);
    } else {
      out.role = Role::kBot;
      out.buffer = static_cast<std::uint32_t>(addr.offset - 2 * wpl_);
    }
  } else if (addr.region == ann_) {
    const std::size_t slot_words = 3 * wpl_;
    out.slot = static_cast<std::uint32_t>(addr.offset / slot_words) + 1;
    const std::size_t within = addr.offset % slot_words;
    if (within < wpl_) {
      out.role = Role::kValid;
    } else {
      out.role = Role::kAnnounce;
      out.buffer = static_cast<std::uint32_t>(within / wpl_ - 1);
      out.field = static_cast<AnnounceField>(within % wpl_);
    }
  } else if (addr.region == shared_) {
    if (addr.offset < wpl_) {
      out.role = Role::kCombinerLock;
    } else if (addr.offset < 2 * wpl_) {
      out.role = Role::kRecoveryLock;
    } else if (addr.offset < 2 * wpl_ + threads_) {
      out.role = Role::kCollected;
      out.slot = static_cast<std::uint32_t>(addr.offset - 2 * wpl_) + 1;
    } else {
      out.role = Role::kList;
    }
  } else if (addr.region == nodes) {
    out.role = Role::kNode;
  }
  return out;
}

void DetectableCombiner::PhaseWork::mark_dirty(NodeHandle node) {
  if (std::find(dirty.begin(), dirty.end(), node) == dirty.end()) dirty.push_back(node);
}

DetectableCombiner::DetectableCombiner(SimulatedNvm& nvm, const CombinerConfig& config, std::size_t root_pairs,
                                       std::size_t lists)
    : nvm_(nvm),
      threads_(config.threads),
      root_pairs_(root_pairs),
      layout_(nvm, config.name, config.threads, lists),
      pool_(nvm, config.name, config.pool_capacity) {
  if (config.threads == 0) throw Fault("a combining object needs at least one thread");
  // Thread ids are 1-based; id 0 is left to setup code.
  if (config.threads + 1 > nvm.max_threads()) throw Fault("more threads than the simulated memory supports");
}

RegionId DetectableCombiner::pool_region() const { return pool_.address(NodeHandle::at(0)).region; }

ThreadCtx DetectableCombiner::register_thread() {
  const std::uint32_t id = registered_.fetch_add(1) + 1;
  if (id > threads_) {
    registered_.fetch_sub(1);
    throw Fault("thread registration beyond the configured " + std::to_string(threads_));
  }
  return ThreadCtx{id};
}

Response DetectableCombiner::execute(ThreadCtx ctx, OpName name, Word param) {
  return await_response(ctx, announce(ctx, name, param));
}

Ticket DetectableCombiner::announce(ThreadCtx ctx, OpName name, Word param) {
  const ThreadId t = ctx.id;
  if (t == 0 || t > threads_) throw Fault("unregistered thread context");
  if (!accepts(name)) throw Fault(std::string("operation ") + std::string(to_string(name)) + " not supported");
  const PersistenceCounters before = nvm_.thread_counters(t);

  Word op_epoch = nvm_.mem_read(layout_.epoch(), t);
  op_epoch = even_ceiling(op_epoch);
  const Word valid = nvm_.mem_read(layout_.valid(t), t);
  const std::uint32_t next = 1U - static_cast<std::uint32_t>(valid & kValidIndexBit);

  nvm_.mem_write(layout_.announce(t, next, AnnounceField::kVal), Response::kPendingWord, t);
  nvm_.mem_write(layout_.announce(t, next, AnnounceField::kEpoch), op_epoch, t);
  nvm_.mem_write(layout_.announce(t, next, AnnounceField::kParam), param, t);
  nvm_.mem_write(layout_.announce(t, next, AnnounceField::kName), static_cast<Word>(name), t);
  nvm_.pwb(layout_.announce(t, next, AnnounceField::kVal), t);
  nvm_.pfence(t);
  nvm_.mem_write(layout_.valid(t), next, t);
  nvm_.pwb(layout_.valid(t), t);
  nvm_.pfence(t);
  nvm_.mem_write(layout_.valid(t), next | kValidReadyBit, t);

  const PersistenceCounters cost = nvm_.thread_counters(t) - before;
  stats_.announced.fetch_add(1, std::memory_order_relaxed);
  stats_.announce_pwb.fetch_add(cost.pwb, std::memory_order_relaxed);
  stats_.announce_pfence.fetch_add(cost.pfence, std::memory_order_relaxed);
  return Ticket{next, op_epoch};
}

Response DetectableCombiner::await_response(ThreadCtx ctx, Ticket ticket) {
  const ThreadId t = ctx.id;
  const PersistentAddress val_addr = layout_.announce(t, ticket.buffer, AnnounceField::kVal);
  const PersistentAddress stamp_addr = layout_.announce(t, ticket.buffer, AnnounceField::kEpoch);

  // Only phases that start after this read are guaranteed to see the ready
  // bit, so the wait threshold is taken from here rather than from the
  // epoch sampled at the start of the announcement.
  Word wait = std::max(ticket.op_epoch, even_ceiling(nvm_.mem_read(layout_.epoch(), t)));
  std::uint64_t late = 0;

  for (;;) {
    if (nvm_.compare_exchange(layout_.combiner_lock(), 0, 1, t)) {
      combine(t, false);
      atomic_max(stats_.max_late_per_op, late);
      return Response::from_word(nvm_.mem_read(val_addr, t));
    }
    bool retry_lock = false;
    while (nvm_.mem_read(layout_.epoch(), t) <= wait + 1) {
      if (nvm_.mem_read(layout_.combiner_lock(), t) == 0 && nvm_.mem_read(layout_.epoch(), t) <= wait + 1) {
        retry_lock = true;
        break;
      }
      nvm_.relax(t);
    }
    if (retry_lock) continue;

    const Word val = nvm_.mem_read(val_addr, t);
    if (val == Response::kPendingWord) {
      // Late arrival: the phase that just finished scanned this slot before
      // the ready bit was visible. The next phase is bound to collect it.
      ++late;
      stats_.late_arrivals.fetch_add(1, std::memory_order_relaxed);
      wait += 2;
      continue;
    }
    // The value is final only once the stamping phase has committed.
    const Word stamp = nvm_.mem_read(stamp_addr, t);
    if (nvm_.mem_read(layout_.epoch(), t) <= stamp + 1) {
      wait = std::max(wait, stamp);
      continue;
    }
    atomic_max(stats_.max_late_per_op, late);
    return Response::from_word(val);
  }
}

std::vector<CollectedOp> DetectableCombiner::scan(ThreadId t, Word epoch) {
  std::vector<CollectedOp> out;
  for (std::uint32_t i = 1; i <= threads_; ++i) {
    const Word valid = nvm_.mem_read(layout_.valid(i), t);
    const auto buffer = static_cast<std::uint32_t>(valid & kValidIndexBit);
    if ((valid & kValidReadyBit) != 0 &&
        nvm_.mem_read(layout_.announce(i, buffer, AnnounceField::kVal), t) == Response::kPendingWord) {
      nvm_.mem_write(layout_.announce(i, buffer, AnnounceField::kEpoch), epoch, t);
      nvm_.mem_write(layout_.collected(i), buffer + 1, t);
      const auto name = static_cast<OpName>(nvm_.mem_read(layout_.announce(i, buffer, AnnounceField::kName), t));
      if (!accepts(name)) throw Fault("slot " + std::to_string(i) + " announces a foreign operation");
      out.push_back(CollectedOp{i, buffer, name});
    } else {
      nvm_.mem_write(layout_.collected(i), 0, t);
    }
  }
  return out;
}

void DetectableCombiner::combine(ThreadId t, bool recovery) {
  const PersistenceCounters before = nvm_.thread_counters(t);
  const Word epoch = nvm_.mem_read(layout_.epoch(), t);
  if (epoch % 2 != 0) throw Fault("combining phase started on an odd epoch");

  const std::vector<CollectedOp> collected = scan(t, epoch);
  PhaseWork work;
  apply_phase(t, epoch, collected, work);

  for (NodeHandle node : work.dirty) pool_.persist(t, node);
  for (std::uint32_t i = 1; i <= threads_; ++i) {
    const Word c = nvm_.mem_read(layout_.collected(i), t);
    if (c != 0) nvm_.pwb(layout_.announce(i, static_cast<std::size_t>(c - 1), AnnounceField::kVal), t);
  }
  const std::size_t next = next_index(epoch);
  nvm_.pwb(layout_.top(next), t);
  if (root_pairs_ == 2) nvm_.pwb(layout_.bot(next), t);
  nvm_.pfence(t);

  nvm_.mem_write(layout_.epoch(), epoch + 1, t);
  nvm_.pwb(layout_.epoch(), t);
  nvm_.pfence(t);
  nvm_.mem_write(layout_.epoch(), epoch + 2, t);

  // Frees wait until the phase is durable: a node unlinked here is still
  // reachable from the previous root if the phase is lost to a crash.
  for (NodeHandle node : work.to_free) pool_.deallocate(node);
  nvm_.mem_write(layout_.combiner_lock(), 0, t);

  const PersistenceCounters cost = nvm_.thread_counters(t) - before;
  stats_.phases.fetch_add(1, std::memory_order_relaxed);
  if (recovery) stats_.recovery_phases.fetch_add(1, std::memory_order_relaxed);
  stats_.collected.fetch_add(collected.size(), std::memory_order_relaxed);
  stats_.allocations.fetch_add(work.allocated.size(), std::memory_order_relaxed);
  stats_.nodes_flushed.fetch_add(work.dirty.size(), std::memory_order_relaxed);
  stats_.roots_flushed.fetch_add(root_pairs_, std::memory_order_relaxed);
  stats_.eliminated_pairs.fetch_add(work.eliminated_pairs, std::memory_order_relaxed);
  stats_.combiner_pwb.fetch_add(cost.pwb, std::memory_order_relaxed);
  stats_.combiner_pfence.fetch_add(cost.pfence, std::memory_order_relaxed);

  if (listener_) {
    PhaseRecord record;
    record.epoch = epoch;
    record.combiner = t;
    record.recovery = recovery;
    record.collected = collected;
    record.reduce_result = work.reduce_result;
    record.eliminated_pairs = work.eliminated_pairs;
    record.allocations = work.allocated.size();
    record.allocated = work.allocated;
    record.frees = work.to_free.size();
    record.pool_full = work.pool_full;
    record.nodes_flushed = work.dirty.size();
    record.roots_flushed = root_pairs_;
    record.combiner_cost = cost;
    listener_(record);
  }
}

Response DetectableCombiner::recover(ThreadCtx ctx) {
  const ThreadId t = ctx.id;
  if (t == 0 || t > threads_) throw Fault("unregistered thread context");
  if (nvm_.compare_exchange(layout_.recovery_lock(), 0, 1, t)) {
    const PersistenceCounters before = nvm_.thread_counters(t);
    Word epoch = nvm_.mem_read(layout_.epoch(), t);
    if (epoch % 2 != 0) {
      // The first increment is durable, so the interrupted phase is complete.
      ++epoch;
      nvm_.mem_write(layout_.epoch(), epoch, t);
      nvm_.pwb(layout_.epoch(), t);
      nvm_.pfence(t);
    }
    const PersistenceCounters cost = nvm_.thread_counters(t) - before;
    stats_.recovery_pwb.fetch_add(cost.pwb, std::memory_order_relaxed);
    stats_.recovery_pfence.fetch_add(cost.pfence, std::memory_order_relaxed);

    const std::vector<NodeChain> chains = live_chains(t, epoch);
    pool_.garbage_collect(t, chains);

    for (std::uint32_t i = 1; i <= threads_; ++i) {
      const Word valid = nvm_.mem_read(layout_.valid(i), t);
      const auto buffer = static_cast<std::uint32_t>(valid & kValidIndexBit);
      // A slot that never announced has nothing to finish.
      if (nvm_.mem_read(layout_.announce(i, buffer, AnnounceField::kName), t) == 0) continue;
      const Word op_epoch = nvm_.mem_read(layout_.announce(i, buffer, AnnounceField::kEpoch), t);
      if ((valid & kValidReadyBit) == 0) nvm_.mem_write(layout_.valid(i), valid | kValidReadyBit, t);
      if (op_epoch == epoch) {
        nvm_.mem_write(layout_.announce(i, buffer, AnnounceField::kVal), Response::kPendingWord, t);
      }
    }
    nvm_.mem_write(layout_.combiner_lock(), 1, t);
    combine(t, true);
    nvm_.mem_write(layout_.recovery_lock(), 2, t);
  } else {
    while (nvm_.mem_read(layout_.recovery_lock(), t) == 1) nvm_.relax(t);
  }
  const Word valid = nvm_.mem_read(layout_.valid(t), t);
  return Response::from_word(
      nvm_.mem_read(layout_.announce(t, valid & kValidIndexBit, AnnounceField::kVal), t));
}

std::vector<NodeChain> DetectableCombiner::peek_live_chains() const {
  const std::size_t active = peek_active_index();
  const NodeHandle top = peek_root(Root::kTop, active);
  if (top.is_none()) return {};
  return {NodeChain{top, root_pairs_ == 2 ? peek_root(Root::kBot, active) : NodeHandle::none()}};
}

std::vector<NodeHandle> DetectableCombiner::peek_live_nodes() const {
  std::vector<NodeHandle> out;
  for (const NodeChain& chain : peek_live_chains()) {
    NodeHandle cur = chain.head;
    while (!cur.is_none()) {
      if (out.size() >= pool_.capacity()) throw Fault("cycle in the live list");
      out.push_back(cur);
      if (cur == chain.tail) break;
      cur = NodeHandle::from_word(nvm_.peek(pool_.address(cur, NodePool::kNext)));
    }
  }
  return out;
}

ProtocolStats DetectableCombiner::stats() const {
  ProtocolStats s;
  s.announced = stats_.announced.load();
  s.phases = stats_.phases.load();
  s.recovery_phases = stats_.recovery_phases.load();
  s.collected = stats_.collected.load();
  s.allocations = stats_.allocations.load();
  s.nodes_flushed = stats_.nodes_flushed.load();
  s.roots_flushed = stats_.roots_flushed.load();
  s.eliminated_pairs = stats_.eliminated_pairs.load();
  s.late_arrivals = stats_.late_arrivals.load();
  s.max_late_per_op = stats_.max_late_per_op.load();
  s.announce_cost = {stats_.announce_pwb.load(), stats_.announce_pfence.load(), 0};
  s.combiner_cost = {stats_.combiner_pwb.load(), stats_.combiner_pfence.load(), 0};
  s.recovery_cost = {stats_.recovery_pwb.load(), stats_.recovery_pfence.load(), 0};
  return s;
}

NodeHandle DetectableCombiner::read_root(ThreadId t, Root root, std::size_t index) {
  return NodeHandle::from_word(nvm_.mem_read(root == Root::kTop ? layout_.top(index) : layout_.bot(index), t));
}

void DetectableCombiner::write_root(ThreadId t, Root root, std::size_t index, NodeHandle node) {
  nvm_.mem_write(root == Root::kTop ? layout_.top(index) : layout_.bot(index), node.to_word(), t);
}

NodeHandle DetectableCombiner::peek_root(Root root, std::size_t index) const {
  return NodeHandle::from_word(nvm_.peek(root == Root::kTop ? layout_.top(index) : layout_.bot(index)));
}

Word DetectableCombiner::read_param(ThreadId t, const CollectedOp& op) {
  return nvm_.mem_read(layout_.announce(op.slot, op.buffer, AnnounceField::kParam), t);
}

void DetectableCombiner::respond(ThreadId t, const CollectedOp& op, Response response) {
  nvm_.mem_write(layout_.announce(op.slot, op.buffer, AnnounceField::kVal), response.word(), t);
}

void DetectableCombiner::list_write(ThreadId t, std::size_t list, std::size_t index, std::uint32_t slot) {
  nvm_.mem_write(layout_.list(list, index), slot, t);
}

CollectedOp DetectableCombiner::list_read(ThreadId t, std::size_t list, std::size_t index) {
  const auto slot = static_cast<std::uint32_t>(nvm_.mem_read(layout_.list(list, index), t));
  const Word c = nvm_.mem_read(layout_.collected(slot), t);
  CollectedOp op{slot, static_cast<std::uint32_t>(c - 1), OpName::kNone};
  op.name = static_cast<OpName>(nvm_.mem_read(layout_.announce(slot, op.buffer, AnnounceField::kName), t));
  return op;
}

}  // namespace dfc

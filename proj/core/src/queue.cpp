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
#include "dfc/queue.hpp"

namespace dfc {

DfcQueue::DfcQueue(SimulatedNvm& nvm, const CombinerConfig& config) : DetectableCombiner(nvm, config, 2, 2) {}

Response DfcQueue::enqueue(ThreadCtx ctx, Word value) {
  if (value > Response::kMaxValue) throw Fault("enqueue value collides with the sentinel encoding");
  return execute(ctx, OpName::kEnqueue, value);
}

Response DfcQueue::dequeue(ThreadCtx ctx) { return execute(ctx, OpName::kDequeue, 0); }

void DfcQueue::apply_phase(ThreadId t, Word epoch, std::span<const CollectedOp> collected, PhaseWork& work) {
  std::int64_t t_enq = -1;
  std::int64_t t_deq = -1;
  for (const CollectedOp& op : collected) {
    if (op.name == OpName::kEnqueue) {
      list_write(t, kEnqList, static_cast<std::size_t>(++t_enq), op.slot);
    } else {
      list_write(t, kDeqList, static_cast<std::size_t>(++t_deq), op.slot);
    }
  }
  work.reduce_result = {t_enq, t_deq};

  const std::size_t active = active_index(epoch);
  NodeHandle head = read_root(t, Root::kTop, active);
  NodeHandle tail = read_root(t, Root::kBot, active);

  for (std::int64_t i = 0; i <= t_enq; ++i) {
    const CollectedOp op = list_read(t, kEnqList, static_cast<std::size_t>(i));
    const Word param = read_param(t, op);
    const std::optional<NodeHandle> node = pool().allocate(t, param, NodeHandle::none());
    if (!node) {
      respond(t, op, Response::pool_full());
      ++work.pool_full;
      continue;
    }
    work.allocated.push_back(*node);
    work.mark_dirty(*node);
    if (tail.is_none()) {
      head = *node;
    } else {
      pool().set_next(t, tail, *node);
      work.mark_dirty(tail);
    }
    tail = *node;
    respond(t, op, Response::ack());
  }

  for (std::int64_t i = 0; i <= t_deq; ++i) {
    const CollectedOp op = list_read(t, kDeqList, static_cast<std::size_t>(i));
    if (head.is_none()) {
      respond(t, op, Response::empty());
      continue;
    }
    respond(t, op, Response::value(pool().param(t, head)));
    work.to_free.push_back(head);
    if (head == tail) {
      head = NodeHandle::none();
      tail = NodeHandle::none();
    } else {
      head = pool().next(t, head);
    }
  }

  const std::size_t next = next_index(epoch);
  write_root(t, Root::kTop, next, head);
  write_root(t, Root::kBot, next, tail);
}

std::vector<NodeChain> DfcQueue::live_chains(ThreadId t, Word epoch) {
  const std::size_t active = active_index(epoch);
  const NodeHandle head = read_root(t, Root::kTop, active);
  const NodeHandle tail = read_root(t, Root::kBot, active);
  if (head.is_none() != tail.is_none()) throw Fault("queue roots disagree on emptiness");
  if (head.is_none()) return {};
  return {NodeChain{head, tail}};
}

NodeHandle DfcQueue::peek_head() const { return peek_root(Root::kTop, peek_active_index()); }
NodeHandle DfcQueue::peek_tail() const { return peek_root(Root::kBot, peek_active_index()); }

std::vector<Word> DfcQueue::contents() const {
  std::vector<Word> out;
  const NodeHandle head = peek_head();
  const NodeHandle tail = peek_tail();
  if (head.is_none() != tail.is_none()) throw Fault("queue roots disagree on emptiness");
  NodeHandle cur = head;
  while (!cur.is_none()) {
    if (out.size() >= pool().capacity()) throw Fault("cycle in the queue list");
    out.push_back(nvm().peek(pool().address(cur, NodePool::kParam)));
    if (cur == tail) return out;
    cur = NodeHandle::from_word(nvm().peek(pool().address(cur, NodePool::kNext)));
  }
  if (!head.is_none()) throw Fault("queue list ends before its tail");
  return out;
}

}  // namespace dfc

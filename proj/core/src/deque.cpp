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
#include "dfc/deque.hpp"

#include <array>

namespace dfc {

DfcDeque::DfcDeque(SimulatedNvm& nvm, const CombinerConfig& config) : DetectableCombiner(nvm, config, 2, 4) {}

Response DfcDeque::push_front(ThreadCtx ctx, Word value) {
  if (value > Response::kMaxValue) throw Fault("push value collides with the sentinel encoding");
  return execute(ctx, OpName::kPushFront, value);
}

Response DfcDeque::push_rear(ThreadCtx ctx, Word value) {
  if (value > Response::kMaxValue) throw Fault("push value collides with the sentinel encoding");
  return execute(ctx, OpName::kPushRear, value);
}

Response DfcDeque::pop_front(ThreadCtx ctx) { return execute(ctx, OpName::kPopFront, 0); }
Response DfcDeque::pop_rear(ThreadCtx ctx) { return execute(ctx, OpName::kPopRear, 0); }

void DfcDeque::apply_phase(ThreadId t, Word epoch, std::span<const CollectedOp> collected, PhaseWork& work) {
  std::array<std::int64_t, 4> top{-1, -1, -1, -1};
  for (const CollectedOp& op : collected) {
    std::size_t list = kPushFrontList;
    switch (op.name) {
      case OpName::kPushFront:
        list = kPushFrontList;
        break;
      case OpName::kPopFront:
        list = kPopFrontList;
        break;
      case OpName::kPushRear:
        list = kPushRearList;
        break;
      default:
        list = kPopRearList;
        break;
    }
    list_write(t, list, static_cast<std::size_t>(++top[list]), op.slot);
  }

  // Same-side elimination, front pairs first.
  auto eliminate = [&](std::size_t push_list, std::size_t pop_list) {
    while (top[push_list] != -1 && top[pop_list] != -1) {
      const CollectedOp push = list_read(t, push_list, static_cast<std::size_t>(top[push_list]));
      const CollectedOp pop = list_read(t, pop_list, static_cast<std::size_t>(top[pop_list]));
      respond(t, push, Response::ack());
      respond(t, pop, Response::value(read_param(t, push)));
      ++work.eliminated_pairs;
      --top[push_list];
      --top[pop_list];
    }
    if (top[push_list] != -1) return top[push_list] + 1;
    if (top[pop_list] != -1) return -(top[pop_list] + 1);
    return std::int64_t{0};
  };
  const std::int64_t front = eliminate(kPushFrontList, kPopFrontList);
  const std::int64_t rear = eliminate(kPushRearList, kPopRearList);
  work.reduce_result = {front, rear};

  const std::size_t active = active_index(epoch);
  NodeHandle head = read_root(t, Root::kTop, active);
  NodeHandle tail = read_root(t, Root::kBot, active);

  auto push = [&](const CollectedOp& op, bool at_front) {
    const Word param = read_param(t, op);
    const std::optional<NodeHandle> node =
        at_front ? pool().allocate(t, param, head, NodeHandle::none())
                 : pool().allocate(t, param, NodeHandle::none(), tail);
    if (!node) {
      respond(t, op, Response::pool_full());
      ++work.pool_full;
      return;
    }
    work.allocated.push_back(*node);
    work.mark_dirty(*node);
    if (head.is_none()) {
      head = *node;
      tail = *node;
    } else if (at_front) {
      pool().set_prev(t, head, *node);
      work.mark_dirty(head);
      head = *node;
    } else {
      pool().set_next(t, tail, *node);
      work.mark_dirty(tail);
      tail = *node;
    }
    respond(t, op, Response::ack());
  };
  auto pop = [&](const CollectedOp& op, bool at_front) {
    if (head.is_none()) {
      respond(t, op, Response::empty());
      return;
    }
    const NodeHandle victim = at_front ? head : tail;
    respond(t, op, Response::value(pool().param(t, victim)));
    work.to_free.push_back(victim);
    if (head == tail) {
      head = NodeHandle::none();
      tail = NodeHandle::none();
    } else if (at_front) {
      head = pool().next(t, head);
    } else {
      tail = pool().prev(t, tail);
    }
  };
  auto apply_surplus = [&](std::int64_t surplus, std::size_t push_list, std::size_t pop_list, bool at_front) {
    for (std::int64_t i = 0; i < surplus; ++i) push(list_read(t, push_list, static_cast<std::size_t>(i)), at_front);
    for (std::int64_t i = 0; i < -surplus; ++i) pop(list_read(t, pop_list, static_cast<std::size_t>(i)), at_front);
  };
  apply_surplus(front, kPushFrontList, kPopFrontList, true);
  apply_surplus(rear, kPushRearList, kPopRearList, false);

  const std::size_t next = next_index(epoch);
  write_root(t, Root::kTop, next, head);
  write_root(t, Root::kBot, next, tail);
}

std::vector<NodeChain> DfcDeque::live_chains(ThreadId t, Word epoch) {
  const std::size_t active = active_index(epoch);
  const NodeHandle head = read_root(t, Root::kTop, active);
  const NodeHandle tail = read_root(t, Root::kBot, active);
  if (head.is_none() != tail.is_none()) throw Fault("deque roots disagree on emptiness");
  if (head.is_none()) return {};
  return {NodeChain{head, tail}};
}

NodeHandle DfcDeque::peek_head() const { return peek_root(Root::kTop, peek_active_index()); }
NodeHandle DfcDeque::peek_tail() const { return peek_root(Root::kBot, peek_active_index()); }

std::vector<Word> DfcDeque::contents() const {
  std::vector<Word> out;
  const NodeHandle head = peek_head();
  const NodeHandle tail = peek_tail();
  if (head.is_none() != tail.is_none()) throw Fault("deque roots disagree on emptiness");
  NodeHandle prev = NodeHandle::none();
  NodeHandle cur = head;
  while (!cur.is_none()) {
    if (out.size() >= pool().capacity()) throw Fault("cycle in the deque list");
    if (!prev.is_none() && NodeHandle::from_word(nvm().peek(pool().address(cur, NodePool::kPrev))) != prev) {
      throw Fault("deque prev link disagrees with next link");
    }
    out.push_back(nvm().peek(pool().address(cur, NodePool::kParam)));
    if (cur == tail) return out;
    prev = cur;
    cur = NodeHandle::from_word(nvm().peek(pool().address(cur, NodePool::kNext)));
  }
  if (!head.is_none()) throw Fault("deque list ends before its tail");
  return out;
}

}  // namespace dfc

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
#include "dfc/stack.hpp"

namespace dfc {

DfcStack::DfcStack(SimulatedNvm& nvm, const CombinerConfig& config) : DetectableCombiner(nvm, config, 1, 2) {}

Response DfcStack::push(ThreadCtx ctx, Word value) {
  if (value > Response::kMaxValue) throw Fault("push value collides with the sentinel encoding");
  return execute(ctx, OpName::kPush, value);
}

Response DfcStack::pop(ThreadCtx ctx) { return execute(ctx, OpName::kPop, 0); }

void DfcStack::apply_phase(ThreadId t, Word epoch, std::span<const CollectedOp> collected, PhaseWork& work) {
  std::int64_t t_push = -1;
  std::int64_t t_pop = -1;
  for (const CollectedOp& op : collected) {
    if (op.name == OpName::kPush) {
      list_write(t, kPushList, static_cast<std::size_t>(++t_push), op.slot);
    } else {
      list_write(t, kPopList, static_cast<std::size_t>(++t_pop), op.slot);
    }
  }

  // Reduce: pair from the tails of both lists.
  while (t_push != -1 && t_pop != -1) {
    const CollectedOp push = list_read(t, kPushList, static_cast<std::size_t>(t_push));
    const CollectedOp pop = list_read(t, kPopList, static_cast<std::size_t>(t_pop));
    respond(t, push, Response::ack());
    respond(t, pop, Response::value(read_param(t, push)));
    ++work.eliminated_pairs;
    --t_push;
    --t_pop;
  }
  const std::int64_t surplus = t_push != -1 ? t_push + 1 : (t_pop != -1 ? -(t_pop + 1) : 0);
  work.reduce_result = {surplus, 0};

  NodeHandle head = read_root(t, Root::kTop, active_index(epoch));
  // The surplus is applied in increasing slot order, the order in which the
  // collected operations linearize.
  if (surplus > 0) {
    for (std::int64_t i = 0; i < surplus; ++i) {
      const CollectedOp op = list_read(t, kPushList, static_cast<std::size_t>(i));
      const Word param = read_param(t, op);
      const std::optional<NodeHandle> node = pool().allocate(t, param, head);
      if (!node) {
        respond(t, op, Response::pool_full());
        ++work.pool_full;
        continue;
      }
      work.allocated.push_back(*node);
      work.mark_dirty(*node);
      respond(t, op, Response::ack());
      head = *node;
    }
  } else if (surplus < 0) {
    for (std::int64_t i = 0; i < -surplus; ++i) {
      const CollectedOp op = list_read(t, kPopList, static_cast<std::size_t>(i));
      if (head.is_none()) {
        respond(t, op, Response::empty());
        continue;
      }
      respond(t, op, Response::value(pool().param(t, head)));
      work.to_free.push_back(head);
      head = pool().next(t, head);
    }
  }
  write_root(t, Root::kTop, next_index(epoch), head);
}

std::vector<NodeChain> DfcStack::live_chains(ThreadId t, Word epoch) {
  const NodeHandle top = read_root(t, Root::kTop, active_index(epoch));
  if (top.is_none()) return {};
  return {NodeChain{top, NodeHandle::none()}};
}

NodeHandle DfcStack::peek_top() const { return peek_root(Root::kTop, peek_active_index()); }

std::vector<Word> DfcStack::contents() const {
  std::vector<Word> out;
  NodeHandle cur = peek_top();
  while (!cur.is_none()) {
    if (out.size() >= pool().capacity()) throw Fault("cycle in the stack list");
    out.push_back(nvm().peek(pool().address(cur, NodePool::kParam)));
    cur = NodeHandle::from_word(nvm().peek(pool().address(cur, NodePool::kNext)));
  }
  return out;
}

}  // namespace dfc

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

#include <vector>

#include "dfc/combining.hpp"

namespace dfc {

/// Detectable persistent FIFO queue. A phase applies every collected
/// enqueue at the tail, then every collected dequeue at the head; there is
/// no elimination. `head.next` walks toward the tail.
///
/// The live list is the segment from the active top (head) to the active
/// bot (tail) inclusive. `tail.next` is never consulted, so a failed phase
/// may leave it pointing at a reclaimed node without harm.
class DfcQueue final : public DetectableCombiner {
 public:
  explicit DfcQueue(SimulatedNvm& nvm, const CombinerConfig& config = {});

  Response enqueue(ThreadCtx ctx, Word value);
  Response dequeue(ThreadCtx ctx);

  StructureKind kind() const override { return StructureKind::kQueue; }
  std::vector<Word> contents() const override;
  NodeHandle peek_head() const;
  NodeHandle peek_tail() const;

 protected:
  bool accepts(OpName name) const override { return name == OpName::kEnqueue || name == OpName::kDequeue; }
  void apply_phase(ThreadId t, Word epoch, std::span<const CollectedOp> collected, PhaseWork& work) override;
  std::vector<NodeChain> live_chains(ThreadId t, Word epoch) override;

 private:
  static constexpr std::size_t kEnqList = 0;
  static constexpr std::size_t kDeqList = 1;
};

}  // namespace dfc

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

/// Detectable persistent double-ended queue with per-side elimination.
/// A phase pairs PushFront/PopFront and PushRear/PopRear separately, then
/// applies the front surplus followed by the rear surplus.
///
/// As in DfcQueue the live list is the [top, bot] segment: `head.prev` and
/// `tail.next` are ignored, while inner links are kept doubly consistent.
class DfcDeque final : public DetectableCombiner {
 public:
  explicit DfcDeque(SimulatedNvm& nvm, const CombinerConfig& config = {});

  Response push_front(ThreadCtx ctx, Word value);
  Response push_rear(ThreadCtx ctx, Word value);
  Response pop_front(ThreadCtx ctx);
  Response pop_rear(ThreadCtx ctx);

  StructureKind kind() const override { return StructureKind::kDeque; }
  /// Front to rear. Faults unless every inner link pair agrees.
  std::vector<Word> contents() const override;
  NodeHandle peek_head() const;
  NodeHandle peek_tail() const;

 protected:
  bool accepts(OpName name) const override {
    return name == OpName::kPushFront || name == OpName::kPushRear || name == OpName::kPopFront ||
           name == OpName::kPopRear;
  }
  void apply_phase(ThreadId t, Word epoch, std::span<const CollectedOp> collected, PhaseWork& work) override;
  std::vector<NodeChain> live_chains(ThreadId t, Word epoch) override;

 private:
  enum List : std::size_t { kPushFrontList = 0, kPopFrontList = 1, kPushRearList = 2, kPopRearList = 3 };
};

}  // namespace dfc

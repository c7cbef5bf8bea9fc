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

/// Detectable persistent stack. Pushes and pops collected in one phase are
/// paired off from the tails of the two lists (elimination); only the
/// surplus touches the linked list.
class DfcStack final : public DetectableCombiner {
 public:
  explicit DfcStack(SimulatedNvm& nvm, const CombinerConfig& config = {});

  Response push(ThreadCtx ctx, Word value);
  Response pop(ThreadCtx ctx);

  StructureKind kind() const override { return StructureKind::kStack; }
  std::vector<Word> contents() const override;
  /// Active top handle (no steps).
  NodeHandle peek_top() const;

 protected:
  bool accepts(OpName name) const override { return name == OpName::kPush || name == OpName::kPop; }
  void apply_phase(ThreadId t, Word epoch, std::span<const CollectedOp> collected, PhaseWork& work) override;
  std::vector<NodeChain> live_chains(ThreadId t, Word epoch) override;

 private:
  static constexpr std::size_t kPushList = 0;
  static constexpr std::size_t kPopList = 1;
};

}  // namespace dfc

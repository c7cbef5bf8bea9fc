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

#include <deque>
#include <span>
#include <vector>

#include "dfc/types.hpp"

namespace dfc::harness {

struct OpSpec {
  OpName name = OpName::kNone;
  Word param = 0;
  friend bool operator==(const OpSpec&, const OpSpec&) = default;
};

/// Plain in-memory reference object. Unbounded: POOL_FULL never occurs.
class SequentialObject {
 public:
  explicit SequentialObject(StructureKind kind) : kind_(kind) {}

  Response apply(OpName name, Word param);
  /// Top (stack) or front (queue, deque) first.
  std::vector<Word> contents() const { return {items_.begin(), items_.end()}; }
  const std::deque<Word>& items() const { return items_; }
  StructureKind kind() const { return kind_; }

  friend bool operator==(const SequentialObject&, const SequentialObject&) = default;

 private:
  StructureKind kind_;
  std::deque<Word> items_;  // index 0 is the top / front
};

std::vector<Response> sequential_oracle(StructureKind kind, std::span<const OpSpec> ops);

}  // namespace dfc::harness

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
#include "dfc/types.hpp"

#include <array>
#include <utility>

namespace dfc {

namespace {

constexpr std::array<std::pair<OpName, std::string_view>, 9> kOpNames{{
    {OpName::kNone, "none"},
    {OpName::kPush, "push"},
    {OpName::kPop, "pop"},
    {OpName::kEnqueue, "enq"},
    {OpName::kDequeue, "deq"},
    {OpName::kPushFront, "push-front"},
    {OpName::kPushRear, "push-rear"},
    {OpName::kPopFront, "pop-front"},
    {OpName::kPopRear, "pop-rear"},
}};

}  // namespace

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::kStack:
      return "stack";
    case StructureKind::kQueue:
      return "queue";
    case StructureKind::kDeque:
      return "deque";
  }
  return "?";
}

std::optional<StructureKind> parse_structure_kind(std::string_view name) {
  if (name == "stack") return StructureKind::kStack;
  if (name == "queue") return StructureKind::kQueue;
  if (name == "deque") return StructureKind::kDeque;
  return std::nullopt;
}

std::string_view to_string(OpName name) {
  for (const auto& [op, text] : kOpNames) {
    if (op == name) return text;
  }
  return "?";
}

std::optional<OpName> parse_op_name(std::string_view name) {
  for (const auto& [op, text] : kOpNames) {
    if (text == name && op != OpName::kNone) return op;
  }
  return std::nullopt;
}

bool is_insert(OpName name) {
  return name == OpName::kPush || name == OpName::kEnqueue || name == OpName::kPushFront ||
         name == OpName::kPushRear;
}

bool belongs_to(OpName name, StructureKind kind) {
  switch (kind) {
    case StructureKind::kStack:
      return name == OpName::kPush || name == OpName::kPop;
    case StructureKind::kQueue:
      return name == OpName::kEnqueue || name == OpName::kDequeue;
    case StructureKind::kDeque:
      return name == OpName::kPushFront || name == OpName::kPushRear || name == OpName::kPopFront ||
             name == OpName::kPopRear;
  }
  return false;
}

Response Response::value(Word v) {
  if (v > kMaxValue) throw Fault("value " + std::to_string(v) + " collides with the sentinel encoding");
  return Response{v + kValueBase};
}

Word Response::value() const {
  if (!has_value()) throw Fault("response " + to_string() + " carries no value");
  return word_ - kValueBase;
}

std::string Response::to_string() const {
  switch (word_) {
    case kPendingWord:
      return "PENDING";
    case kAckWord:
      return "ACK";
    case kEmptyWord:
      return "EMPTY";
    case kPoolFullWord:
      return "POOL_FULL";
    default:
      return std::to_string(word_ - kValueBase);
  }
}

}  // namespace dfc

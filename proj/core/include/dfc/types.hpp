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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dfc/nvm.hpp"

namespace dfc {

enum class StructureKind : std::uint8_t { kStack, kQueue, kDeque };

std::string_view to_string(StructureKind kind);
std::optional<StructureKind> parse_structure_kind(std::string_view name);

/// Operation codes as stored in the `name` word of an announcement.
/// kNone marks a slot that has never announced anything.
enum class OpName : Word {
  kNone = 0,
  kPush = 1,
  kPop = 2,
  kEnqueue = 3,
  kDequeue = 4,
  kPushFront = 5,
  kPushRear = 6,
  kPopFront = 7,
  kPopRear = 8,
};

std::string_view to_string(OpName name);
std::optional<OpName> parse_op_name(std::string_view name);
bool is_insert(OpName name);
bool belongs_to(OpName name, StructureKind kind);

/// The response word of an announcement. Sentinels occupy 0..3 and a user
/// value v is stored as v + 4, so every response fits one persistent word.
class Response {
 public:
  static constexpr Word kPendingWord = 0;
  static constexpr Word kAckWord = 1;
  static constexpr Word kEmptyWord = 2;
  static constexpr Word kPoolFullWord = 3;
  static constexpr Word kValueBase = 4;
  static constexpr Word kMaxValue = ~Word{0} - kValueBase;

  constexpr Response() = default;

  static constexpr Response from_word(Word w) { return Response{w}; }
  static constexpr Response pending() { return Response{kPendingWord}; }
  static constexpr Response ack() { return Response{kAckWord}; }
  static constexpr Response empty() { return Response{kEmptyWord}; }
  static constexpr Response pool_full() { return Response{kPoolFullWord}; }
  static Response value(Word v);

  constexpr bool is_pending() const { return word_ == kPendingWord; }
  constexpr bool is_ack() const { return word_ == kAckWord; }
  constexpr bool is_empty() const { return word_ == kEmptyWord; }
  constexpr bool is_pool_full() const { return word_ == kPoolFullWord; }
  constexpr bool has_value() const { return word_ >= kValueBase; }
  Word value() const;
  constexpr Word word() const { return word_; }

  std::string to_string() const;

  friend constexpr bool operator==(Response, Response) = default;

 private:
  constexpr explicit Response(Word w) : word_(w) {}
  Word word_ = kPendingWord;
};

}  // namespace dfc

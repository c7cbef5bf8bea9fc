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
#include "dfc/harness/oracle.hpp"

namespace dfc::harness {

Response SequentialObject::apply(OpName name, Word param) {
  if (!belongs_to(name, kind_)) throw Fault("operation does not belong to this structure");
  auto take_front = [this] {
    if (items_.empty()) return Response::empty();
    const Word v = items_.front();
    items_.pop_front();
    return Response::value(v);
  };
  switch (name) {
    case OpName::kPush:
    case OpName::kPushFront:
      items_.push_front(param);
      return Response::ack();
    case OpName::kEnqueue:
    case OpName::kPushRear:
      items_.push_back(param);
      return Response::ack();
    case OpName::kPop:
    case OpName::kDequeue:
    case OpName::kPopFront:
      return take_front();
    case OpName::kPopRear: {
      if (items_.empty()) return Response::empty();
      const Word v = items_.back();
      items_.pop_back();
      return Response::value(v);
    }
    case OpName::kNone:
      break;
  }
  throw Fault("unknown operation");
}

std::vector<Response> sequential_oracle(StructureKind kind, std::span<const OpSpec> ops) {
  SequentialObject object(kind);
  std::vector<Response> out;
  out.reserve(ops.size());
  for (const OpSpec& op : ops) out.push_back(object.apply(op.name, op.param));
  return out;
}

}  // namespace dfc::harness

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
#include "dfc/harness/history.hpp"

#include <sstream>

namespace dfc::harness {

std::string_view to_string(OpStatus status) {
  switch (status) {
    case OpStatus::kCompleted:
      return "completed";
    case OpStatus::kExecuted:
      return "crashed-executed";
    case OpStatus::kDropped:
      return "crashed-dropped";
  }
  return "?";
}

std::string History::to_text() const {
  std::ostringstream out;
  out << "history " << dfc::to_string(kind) << " threads=" << threads << " ops=" << ops.size()
      << " crashes=" << crashes.size() << " final_epoch=" << final_epoch << "\n";
  for (const OpEvent& op : ops) {
    out << "  op#" << op.id << " t" << op.thread << " " << dfc::to_string(op.name);
    if (is_insert(op.name)) out << "(" << op.param << ")";
    out << " [" << op.invoke_clock << "," << op.end_clock << "] " << to_string(op.status);
    if (op.status == OpStatus::kCompleted) out << " -> " << op.response.to_string();
    if (op.stamp) out << " stamp=" << *op.stamp;
    out << "\n";
  }
  for (std::size_t i = 0; i < crashes.size(); ++i) {
    out << "  crash " << i + 1 << " at clock " << crashes[i].clock << " step " << crashes[i].step
        << (crashes[i].during_recovery ? " (during recovery)" : "") << " persisted epoch "
        << crashes[i].persisted_epoch << "\n";
  }
  for (const RecoveryEvent& rec : recoveries) {
    out << "  recover t" << rec.thread << " after crash " << rec.crash << " -> " << rec.response.to_string() << "\n";
  }
  out << "  final [";
  for (std::size_t i = 0; i < final_contents.size(); ++i) out << (i ? " " : "") << final_contents[i];
  out << "]\n";
  return out.str();
}

}  // namespace dfc::harness

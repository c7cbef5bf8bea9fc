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
#include "dfc/harness/checker.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace dfc::harness {

namespace {

std::string describe(const OpEvent& op) {
  std::ostringstream out;
  out << "op#" << op.id << " (t" << op.thread << " " << to_string(op.name);
  if (is_insert(op.name)) out << " " << op.param;
  out << ")";
  return out.str();
}

void sort_by_thread(std::vector<const OpEvent*>& ops) {
  std::sort(ops.begin(), ops.end(), [](const OpEvent* a, const OpEvent* b) { return a->thread < b->thread; });
}

// Appends eliminated pairs taken from the tails, leaving the surplus in place.
void emit_pairs(std::vector<const OpEvent*>& pushes, std::vector<const OpEvent*>& pops,
                std::vector<const OpEvent*>& out) {
  while (!pushes.empty() && !pops.empty()) {
    out.push_back(pushes.back());
    out.push_back(pops.back());
    pushes.pop_back();
    pops.pop_back();
  }
}

void append(std::vector<const OpEvent*>& out, const std::vector<const OpEvent*>& ops) {
  out.insert(out.end(), ops.begin(), ops.end());
}

std::vector<const OpEvent*> phase_order(StructureKind kind, std::vector<const OpEvent*> group) {
  sort_by_thread(group);
  std::vector<const OpEvent*> out;
  auto select = [&](OpName name) {
    std::vector<const OpEvent*> v;
    for (const OpEvent* op : group) {
      if (op->name == name) v.push_back(op);
    }
    return v;
  };
  switch (kind) {
    case StructureKind::kStack: {
      auto pushes = select(OpName::kPush);
      auto pops = select(OpName::kPop);
      emit_pairs(pushes, pops, out);
      append(out, pushes);
      append(out, pops);
      break;
    }
    case StructureKind::kQueue:
      append(out, select(OpName::kEnqueue));
      append(out, select(OpName::kDequeue));
      break;
    case StructureKind::kDeque: {
      auto push_front = select(OpName::kPushFront);
      auto pop_front = select(OpName::kPopFront);
      auto push_rear = select(OpName::kPushRear);
      auto pop_rear = select(OpName::kPopRear);
      emit_pairs(push_front, pop_front, out);
      emit_pairs(push_rear, pop_rear, out);
      append(out, push_front);
      append(out, pop_front);
      append(out, push_rear);
      append(out, pop_rear);
      break;
    }
  }
  return out;
}

std::string contents_text(const std::vector<Word>& items) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? " " : "") << items[i];
  out << "]";
  return out.str();
}

}  // namespace

Verdict check_durably_linearizable(const History& history) {
  Verdict verdict;
  verdict.linearized.assign(history.ops.size(), std::nullopt);
  auto reject = [&verdict](std::string reason) {
    verdict.accepted = false;
    verdict.reason = std::move(reason);
    return verdict;
  };
  if (!history.complete) return reject("history is incomplete");

  std::map<Word, std::vector<const OpEvent*>> phases;
  for (const OpEvent& op : history.ops) {
    if (op.status == OpStatus::kDropped) continue;
    if (!op.stamp) return reject(describe(op) + " took effect but carries no phase stamp");
    if (*op.stamp % 2 != 0) return reject(describe(op) + " stamped with odd epoch " + std::to_string(*op.stamp));
    if (*op.stamp + 2 > history.final_epoch) {
      return reject(describe(op) + " stamped by uncommitted phase " + std::to_string(*op.stamp));
    }
    phases[*op.stamp].push_back(&op);
  }

  SequentialObject object(history.kind);
  std::uint64_t max_invoke = 0;
  for (auto& [epoch, group] : phases) {
    std::set<ThreadId> seen;
    for (const OpEvent* op : group) {
      if (!seen.insert(op->thread).second) {
        return reject("phase " + std::to_string(epoch) + " holds two ops of thread " + std::to_string(op->thread));
      }
    }
    for (const OpEvent* op : phase_order(history.kind, group)) {
      if (op->end_clock < max_invoke) {
        return reject(describe(*op) + " ends before an op it is ordered after was invoked");
      }
      max_invoke = std::max(max_invoke, op->invoke_clock);
      const Response r = object.apply(op->name, op->param);
      verdict.order.push_back(op->id);
      verdict.linearized[op->id] = r;
      if (op->status == OpStatus::kCompleted && r != op->response) {
        return reject(describe(*op) + " in phase " + std::to_string(epoch) + " returned " + op->response.to_string() +
                      ", witness order gives " + r.to_string() + " (position " +
                      std::to_string(verdict.order.size() - 1) + ")");
      }
    }
  }
  if (object.contents() != history.final_contents) {
    return reject("final contents " + contents_text(history.final_contents) + " differ from replay " +
                  contents_text(object.contents()));
  }
  return verdict;
}

SearchResult brute_force_linearizable(const History& history, std::size_t max_ops) {
  SearchResult result;
  const std::size_t n = history.ops.size();
  if (n > max_ops || n > 20) {
    result.skipped = true;
    return result;
  }
  if (!history.complete) {
    result.reason = "history is incomplete";
    return result;
  }
  const auto& ops = history.ops;
  const std::uint32_t full = (1U << n) - 1;
  std::uint32_t mandatory = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ops[i].status == OpStatus::kCompleted) mandatory |= 1U << i;
  }

  std::set<std::pair<std::uint32_t, std::vector<Word>>> failed;
  // decided: ops placed or skipped. Returns true if the rest can be completed.
  auto search = [&](auto&& self, std::uint32_t decided, const SequentialObject& object) -> bool {
    ++result.states;
    if ((~decided & full & mandatory) == 0 && object.contents() == history.final_contents) return true;
    if (decided == full) return false;
    auto key = std::make_pair(decided, object.contents());
    if (failed.count(key)) return false;
    for (std::size_t o = 0; o < n; ++o) {
      if (decided & (1U << o)) continue;
      std::uint32_t next = decided | (1U << o);
      bool allowed = true;
      for (std::size_t p = 0; p < n && allowed; ++p) {
        if (p == o || (decided & (1U << p)) || ops[p].end_clock >= ops[o].invoke_clock) continue;
        // p finished before o started: o may only go first if p is optional
        // and is thereby left out.
        if (mandatory & (1U << p)) {
          allowed = false;
        } else {
          next |= 1U << p;
        }
      }
      if (!allowed) continue;
      SequentialObject after = object;
      const Response r = after.apply(ops[o].name, ops[o].param);
      if ((mandatory & (1U << o)) && r != ops[o].response) continue;
      if (self(self, next, after)) return true;
    }
    failed.insert(std::move(key));
    return false;
  };
  result.accepted = search(search, 0, SequentialObject(history.kind));
  if (!result.accepted) result.reason = "no real-time respecting order reproduces the responses and final state";
  return result;
}

DetectabilityReport check_detectable(const History& history, const Verdict& witness) {
  DetectabilityReport report;
  auto reject = [&report](std::string reason) {
    report.accepted = false;
    report.reason = std::move(reason);
    return report;
  };
  if (!witness.accepted) return reject("no witness linearization: " + witness.reason);

  for (const OpEvent& op : history.ops) {
    if (op.status == OpStatus::kExecuted) ++report.executed_pending;
    if (op.status == OpStatus::kDropped) ++report.dropped_pending;
    if (op.status == OpStatus::kExecuted && !witness.linearized[op.id]) {
      return reject(describe(op) + " was announced durably but is missing from the linearization");
    }
  }
  for (const RecoveryEvent& rec : history.recoveries) {
    if (rec.crash == 0 || rec.crash > history.crashes.size()) return reject("recovery event without a crash");
    const std::uint64_t crash_clock = history.crashes[rec.crash - 1].clock;
    const OpEvent* last = nullptr;
    for (const OpEvent& op : history.ops) {
      if (op.thread == rec.thread && op.invoke_clock < crash_clock && op.status != OpStatus::kDropped) last = &op;
    }
    Response expected = Response::pending();
    if (last != nullptr) {
      expected = last->status == OpStatus::kCompleted ? last->response : *witness.linearized[last->id];
    }
    ++report.checked;
    if (rec.response != expected) {
      return reject("recover on t" + std::to_string(rec.thread) + " after crash " + std::to_string(rec.crash) +
                    " returned " + rec.response.to_string() + ", expected " + expected.to_string() +
                    (last ? " from " + describe(*last) : std::string(" (no prior op)")));
    }
  }
  return report;
}

}  // namespace dfc::harness

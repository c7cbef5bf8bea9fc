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
#include "dfc/harness/runner.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "dfc/dfc.hpp"

namespace dfc::harness {

namespace {

constexpr std::array<std::string_view, kCrashClassCount + 1> kClassNames{
    "before-announce-persist", "valid-flip-unpersisted", "before-ready-bit", "after-ready-bit", "mid-combine",
    "odd-epoch-unpersisted",   "odd-epoch-persisted",    "mid-recovery",     "other",
};

void accumulate(ProtocolStats& into, const ProtocolStats& s) {
  into.announced += s.announced;
  into.phases += s.phases;
  into.recovery_phases += s.recovery_phases;
  into.collected += s.collected;
  into.allocations += s.allocations;
  into.nodes_flushed += s.nodes_flushed;
  into.roots_flushed += s.roots_flushed;
  into.eliminated_pairs += s.eliminated_pairs;
  into.late_arrivals += s.late_arrivals;
  into.max_late_per_op = std::max(into.max_late_per_op, s.max_late_per_op);
  into.announce_cost += s.announce_cost;
  into.combiner_cost += s.combiner_cost;
  into.recovery_cost += s.recovery_cost;
}

std::vector<OpName> op_names(StructureKind kind) {
  switch (kind) {
    case StructureKind::kStack:
      return {OpName::kPush, OpName::kPop};
    case StructureKind::kQueue:
      return {OpName::kEnqueue, OpName::kDequeue};
    case StructureKind::kDeque:
      return {OpName::kPushFront, OpName::kPopFront, OpName::kPushRear, OpName::kPopRear};
  }
  return {};
}

CrashPolicy policy_for_crash(const CrashPolicy& base, std::size_t crash_index) {
  if (base.mode != CrashPolicy::Mode::kRandomized) return base;
  return CrashPolicy::randomized(base.seed * 0x9E3779B97F4A7C15ULL + crash_index);
}

}  // namespace

std::string_view to_string(CrashClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

std::optional<CrashClass> parse_crash_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<CrashClass>(i);
  }
  return std::nullopt;
}

std::vector<Script> generate_scripts(StructureKind kind, std::size_t threads, std::size_t total_ops,
                                     std::uint64_t seed, bool paired) {
  std::mt19937_64 rng(seed);
  const std::vector<OpName> names = op_names(kind);
  std::vector<Script> scripts(threads);
  Word next_value = 1;
  for (std::size_t i = 0; i < total_ops; ++i) {
    Script& script = scripts[i % threads];
    OpName name = names[rng() % names.size()];
    if (paired) {
      // Insert then the matching remove on the same side.
      if (script.size() % 2 == 1) {
        const OpName prev = script.back().name;
        name = prev == OpName::kPush        ? OpName::kPop
               : prev == OpName::kEnqueue   ? OpName::kDequeue
               : prev == OpName::kPushFront ? OpName::kPopFront
                                            : OpName::kPopRear;
      } else {
        const std::size_t sides = kind == StructureKind::kDeque ? 2 : 1;
        name = names[(rng() % sides) * 2];
      }
    }
    script.push_back(OpSpec{name, is_insert(name) ? next_value++ : 0});
  }
  return scripts;
}

std::vector<CrashClass> classify_trace(const std::vector<TraceEntry>& trace, const DetectableCombiner& object) {
  using Role = ProtocolLayout::Role;
  struct ThreadView {
    bool ready_written = false;
    bool announce_pwb = false;
    bool valid_pwb = false;
    bool epoch_pwb = false;
    bool combining = false;
  };
  std::vector<ThreadView> view(object.threads() + 1);
  std::vector<CrashClass> out;
  out.reserve(trace.size());
  for (const TraceEntry& e : trace) {
    const auto c = object.classify(e.addr);
    ThreadView& v = view.at(e.thread);
    CrashClass k = CrashClass::kOther;
    const bool own_record = c.role == Role::kAnnounce && c.slot == e.thread;
    if (e.recovery) {
      k = CrashClass::kMidRecovery;
    } else if (v.ready_written) {
      k = CrashClass::kAfterReadyBit;
    } else if (v.combining) {
      if (e.access == Access::kPwb && c.role == Role::kEpoch) {
        k = CrashClass::kOddEpochUnpersisted;
      } else if (e.access == Access::kPfence && v.epoch_pwb) {
        k = CrashClass::kOddEpochUnpersisted;
      } else if (e.access == Access::kWrite && c.role == Role::kEpoch && e.value % 2 == 0) {
        k = CrashClass::kOddEpochPersisted;
      } else {
        k = CrashClass::kMidCombine;
      }
    } else if ((e.access == Access::kWrite || e.access == Access::kPwb) && own_record) {
      k = CrashClass::kBeforeAnnouncePersist;
    } else if (e.access == Access::kPfence && v.announce_pwb) {
      k = CrashClass::kBeforeAnnouncePersist;
    } else if (e.access == Access::kWrite && c.role == Role::kValid && (e.value & kValidReadyBit) == 0) {
      k = CrashClass::kValidFlipUnpersisted;
    } else if (e.access == Access::kPwb && c.role == Role::kValid) {
      k = CrashClass::kValidFlipUnpersisted;
    } else if (e.access == Access::kPfence && v.valid_pwb) {
      k = CrashClass::kValidFlipUnpersisted;
    } else if (e.access == Access::kWrite && c.role == Role::kValid) {
      k = CrashClass::kBeforeReadyBit;
    }
    out.push_back(k);

    v.ready_written = !e.recovery && e.access == Access::kWrite && c.role == Role::kValid &&
                      (e.value & kValidReadyBit) != 0 && !v.combining;
    v.announce_pwb = e.access == Access::kPwb && own_record && !v.combining;
    v.valid_pwb = e.access == Access::kPwb && c.role == Role::kValid;
    v.epoch_pwb = e.access == Access::kPwb && c.role == Role::kEpoch;
    if (e.access == Access::kWrite && c.role == Role::kCollected) v.combining = true;
    if (e.access == Access::kWrite && c.role == Role::kCombinerLock && e.value == 0) v.combining = false;
  }
  return out;
}

RunResult run_schedule(const RunConfig& config) {
  RunResult result;
  History& history = result.history;
  history.kind = config.kind;
  history.threads = config.threads;
  if (config.scripts.size() != config.threads) throw Fault("one script per thread required");
  for (const Script& script : config.scripts) {
    for (const OpSpec& op : script) {
      if (!belongs_to(op.name, config.kind)) throw Fault("script op does not belong to the structure");
    }
  }

  SimulatedNvm nvm(NvmConfig{config.line_bytes, config.threads + 1, true});
  const CombinerConfig combiner_config{config.threads, config.pool_capacity, "dfc"};
  std::unique_ptr<DetectableCombiner> object;
  std::vector<ThreadCtx> ctx(config.threads + 1);
  std::set<std::size_t> live;

  FiberScheduler scheduler(nvm, config.schedule, config.step_limit);
  if (config.record_trace) scheduler.set_trace(&result.trace);

  auto snapshot_live = [&] {
    live.clear();
    for (NodeHandle node : object->peek_live_nodes()) live.insert(node.index());
  };
  auto attach = [&] {
    if (object) accumulate(result.stats, object->stats());
    object = make_structure(config.kind, nvm, combiner_config);
    for (std::size_t t = 1; t <= config.threads; ++t) ctx[t] = object->register_thread();
    snapshot_live();
    object->set_phase_listener([&](const PhaseRecord& record) {
      for (NodeHandle node : record.allocated) {
        if (live.count(node.index()) != 0) {
          result.memory_failures.push_back("phase " + std::to_string(record.epoch) + " allocated live node " +
                                           std::to_string(node.index()));
        }
      }
      snapshot_live();
      if (config.record_phases) result.phases.push_back(record);
    });
  };

  struct ThreadState {
    std::size_t cursor = 0;
    std::optional<std::uint32_t> pending;
    std::uint64_t invoke_step = 0;
    Response recovered;
  };
  std::vector<ThreadState> state(config.threads + 1);
  std::uint64_t clock = 0;

  auto op_body = [&](ThreadId t) {
    return [&, t] {
      ThreadState& s = state[t];
      const Script& script = config.scripts[t - 1];
      while (s.cursor < script.size()) {
        const OpSpec& spec = script[s.cursor];
        OpEvent event;
        event.id = static_cast<std::uint32_t>(history.ops.size());
        event.thread = t;
        event.name = spec.name;
        event.param = spec.param;
        event.era = static_cast<std::uint32_t>(history.crashes.size());
        event.buffer = 1U - static_cast<std::uint32_t>(object->peek_valid(t) & kValidIndexBit);
        event.invoke_clock = ++clock;
        history.ops.push_back(event);
        s.pending = event.id;
        s.invoke_step = scheduler.step();

        const Response r = object->execute(ctx[t], spec.name, spec.param);

        OpEvent& done = history.ops[event.id];
        done.response = r;
        done.end_clock = ++clock;
        done.stamp = object->peek_announce(t, done.buffer, AnnounceField::kEpoch);
        result.max_op_steps = std::max(result.max_op_steps, scheduler.step() - s.invoke_step);
        s.pending.reset();
        ++s.cursor;
      }
    };
  };

  auto check_memory = [&] {
    // Harness-side inspection must not consume schedule steps.
    nvm.set_observer(nullptr);
    ++result.memory_checks;
    NodePool& pool = object->pool();
    const std::size_t reachable = object->peek_live_nodes().size();
    if (pool.free_count() != pool.capacity() - reachable) {
      result.memory_failures.push_back("free count " + std::to_string(pool.free_count()) + " != capacity - " +
                                       std::to_string(reachable) + " reachable");
    }
    if (!pool.bitmap_consistent()) result.memory_failures.push_back("bitmap summary inconsistent");
    auto bitmap = [&pool] {
      std::vector<std::uint64_t> words{pool.root_word()};
      for (std::size_t i = 0; i < 64; ++i) words.push_back(pool.leaf_word(i));
      return words;
    };
    const auto before = bitmap();
    const auto chains = object->peek_live_chains();
    pool.garbage_collect(0, chains);
    const auto once = bitmap();
    pool.garbage_collect(0, chains);
    if (once != bitmap()) result.memory_failures.push_back("garbage collection is not idempotent");
    if (once != before) result.memory_failures.push_back("bitmap after recovery differs from a fresh collection");
    nvm.set_observer(&scheduler);
  };

  auto handle_crash = [&](bool during_recovery) {
    CrashEvent crash;
    crash.clock = ++clock;
    crash.step = scheduler.step();
    crash.during_recovery = during_recovery;
    nvm.simulate_crash(policy_for_crash(config.policy, history.crashes.size()));
    crash.persisted_epoch = object->peek_epoch();
    history.crashes.push_back(crash);
    for (std::size_t t = 1; t <= config.threads; ++t) {
      ThreadState& s = state[t];
      if (!s.pending) continue;
      OpEvent& op = history.ops[*s.pending];
      const bool flipped = (object->peek_valid(static_cast<std::uint32_t>(t)) & kValidIndexBit) == op.buffer;
      op.status = flipped ? OpStatus::kExecuted : OpStatus::kDropped;
      op.end_clock = crash.clock;
      s.pending.reset();
      ++s.cursor;
    }
    // A durable valid word must point at a durable announcement.
    for (std::uint32_t t = 1; t <= config.threads; ++t) {
      const Word valid = nvm.peek_persisted(object->layout().valid(t));
      if (valid != 0 && nvm.peek_persisted(object->layout().announce(t, valid & kValidIndexBit,
                                                                     AnnounceField::kName)) == 0) {
        result.memory_failures.push_back("valid of slot " + std::to_string(t) + " persisted before its record");
      }
    }
    attach();
  };

  attach();
  nvm.set_observer(&scheduler);
  bool recovering = false;
  try {
    for (;;) {
      std::vector<FiberScheduler::Body> bodies;
      if (recovering) {
        for (std::size_t t = 1; t <= config.threads; ++t) {
          const auto id = static_cast<ThreadId>(t);
          bodies.push_back({id, [&, id] { state[id].recovered = object->recover(ctx[id]); }});
        }
      } else {
        for (std::size_t t = 1; t <= config.threads; ++t) {
          if (state[t].cursor < config.scripts[t - 1].size()) {
            bodies.push_back({static_cast<ThreadId>(t), op_body(static_cast<ThreadId>(t))});
          }
        }
      }
      const auto outcome = scheduler.run(std::move(bodies), recovering);
      if (outcome == FiberScheduler::Outcome::kStepLimit) {
        result.step_limit_hit = true;
        history.complete = false;
        break;
      }
      if (outcome == FiberScheduler::Outcome::kCrashed) {
        handle_crash(recovering);
        recovering = true;
        continue;
      }
      if (recovering) {
        const auto crash = static_cast<std::uint32_t>(history.crashes.size());
        for (std::size_t t = 1; t <= config.threads; ++t) {
          history.recoveries.push_back({static_cast<ThreadId>(t), crash, state[t].recovered});
        }
        for (OpEvent& op : history.ops) {
          if (op.status == OpStatus::kExecuted && !op.stamp) {
            op.stamp = object->peek_announce(op.thread, op.buffer, AnnounceField::kEpoch);
          }
        }
        check_memory();
        recovering = false;
        continue;
      }
      break;
    }
    if (history.complete) {
      history.final_contents = object->contents();
      history.final_epoch = object->peek_epoch();
    }
  } catch (const Fault& fault) {
    result.fault = fault.what();
    history.complete = false;
  }
  nvm.set_observer(nullptr);
  result.steps = scheduler.step();
  accumulate(result.stats, object->stats());
  result.max_late_per_op = result.stats.max_late_per_op;
  result.metrics = nvm.metrics_snapshot();
  if (config.record_trace) result.trace_classes = classify_trace(result.trace, *object);
  return result;
}

CaseOutcome evaluate(const RunConfig& config, bool with_brute_force) {
  CaseOutcome out;
  out.config = config;
  out.result = run_schedule(config);
  const RunResult& r = out.result;
  auto fail = [&out](std::string why) {
    if (out.failure.empty()) out.failure = std::move(why);
  };
  if (r.fault) fail("fault: " + *r.fault);
  if (r.step_limit_hit) fail("step limit reached after " + std::to_string(r.steps) + " steps");
  out.witness = check_durably_linearizable(r.history);
  if (!out.witness.accepted) fail("REJECT: " + out.witness.reason);
  out.detectability = check_detectable(r.history, out.witness);
  if (out.witness.accepted && !out.detectability.accepted) fail("NOT DETECTABLE: " + out.detectability.reason);
  if (!r.memory_failures.empty()) fail("memory: " + r.memory_failures.front());
  if (r.max_late_per_op > 1) fail("an op arrived late " + std::to_string(r.max_late_per_op) + " times");
  if (with_brute_force) out.brute_force = brute_force_linearizable(r.history);
  return out;
}

namespace {

std::optional<std::uint64_t> pick_step(const RunResult& probe, std::uint64_t from, std::optional<CrashClass> target,
                                       std::mt19937_64& rng) {
  std::vector<std::uint64_t> candidates;
  for (std::size_t i = 0; i < probe.trace.size(); ++i) {
    const TraceEntry& e = probe.trace[i];
    if (e.step < from) continue;
    const CrashClass c = probe.trace_classes[i];
    if (target ? c == *target : c != CrashClass::kOther) candidates.push_back(e.step);
  }
  if (candidates.empty()) return std::nullopt;
  return candidates[rng() % candidates.size()];
}

CrashClass class_at(const RunResult& probe, std::uint64_t step) {
  for (std::size_t i = 0; i < probe.trace.size(); ++i) {
    if (probe.trace[i].step == step) return probe.trace_classes[i];
  }
  return CrashClass::kOther;
}

}  // namespace

CaseOutcome run_targeted_case(const CaseRequest& request) {
  std::mt19937_64 rng(request.seed * 0x2545F4914F6CDD1DULL + 17);
  RunConfig config;
  config.kind = request.kind;
  config.threads = request.threads;
  config.scripts = generate_scripts(request.kind, request.threads, request.ops, rng());
  config.schedule.seed = rng();
  config.policy = request.policy;
  if (config.policy.mode == CrashPolicy::Mode::kRandomized) config.policy.seed = rng();
  config.record_trace = true;

  std::size_t crashes = request.crashes;
  if (request.target == CrashClass::kMidRecovery) crashes = std::max<std::size_t>(crashes, 2);

  std::vector<CrashClass> taken;
  std::uint64_t from = 0;
  for (std::size_t k = 0; k < crashes; ++k) {
    const RunResult probe = run_schedule(config);
    std::optional<CrashClass> want;
    if (k == 0 && request.target && request.target != CrashClass::kMidRecovery) want = request.target;
    if (k == 1 && request.target == CrashClass::kMidRecovery) want = CrashClass::kMidRecovery;
    std::optional<std::uint64_t> step = pick_step(probe, from, want, rng);
    if (!step && want) step = pick_step(probe, from, std::nullopt, rng);
    if (!step) break;
    taken.push_back(class_at(probe, *step));
    config.schedule.crash_points.push_back(*step);
    from = *step + 1;
  }
  config.record_trace = false;
  CaseOutcome out = evaluate(config);
  out.crash_classes = std::move(taken);
  return out;
}

void FuzzReport::add(const CaseOutcome& outcome) {
  ++runs;
  const RunResult& r = outcome.result;
  if (!outcome.witness.accepted) ++rejects;
  if (outcome.witness.accepted && !outcome.detectability.accepted) ++detect_failures;
  if (!r.memory_failures.empty()) ++memory_failures;
  if (!r.history.complete) ++incomplete;
  crashes += r.history.crashes.size();
  memory_checks += r.memory_checks;
  detect_checks += outcome.detectability.checked;
  max_late_per_op = std::max(max_late_per_op, r.max_late_per_op);
  for (CrashClass c : outcome.crash_classes) {
    if (c != CrashClass::kOther) ++class_hits[static_cast<std::size_t>(c)];
  }
  if (!outcome.ok() && !first_failure) first_failure = outcome;
}

FuzzReport run_fuzz(const FuzzOptions& options, const std::function<void(const CaseOutcome&)>& on_case) {
  FuzzReport report;
  for (std::size_t i = 0; i < options.schedules; ++i) {
    std::mt19937_64 rng(options.seed + i * 7919);
    CaseRequest request;
    request.kind = options.kind;
    request.policy = CrashPolicy{options.policy, 0};
    request.seed = options.seed + i;
    request.threads = 2 + rng() % (options.max_threads - 1);
    request.ops = request.threads + rng() % (options.max_ops - request.threads + 1);
    const std::uint64_t roll = rng() % 10;
    request.crashes = roll == 0 ? 0 : (roll < 7 ? 1 : 2);
    // Cycle the target so every class is exercised in every batch.
    request.target = static_cast<CrashClass>(i % kCrashClassCount);
    if (request.crashes == 0) request.target.reset();
    const CaseOutcome outcome = run_targeted_case(request);
    report.add(outcome);
    if (on_case) on_case(outcome);
  }
  return report;
}

FuzzReport run_boundary_sweep(StructureKind kind, CrashPolicy policy, std::uint64_t seed, std::size_t threads,
                              std::size_t ops) {
  RunConfig config;
  config.kind = kind;
  config.threads = threads;
  config.scripts = generate_scripts(kind, threads, ops, seed);
  config.schedule.seed = seed;
  config.policy = policy;
  config.record_trace = true;
  const RunResult probe = run_schedule(config);
  config.record_trace = false;

  // Crash right before and right after every write, pwb and pfence.
  std::set<std::size_t> points;
  for (std::size_t i = 0; i < probe.trace.size(); ++i) {
    const Access a = probe.trace[i].access;
    if (a == Access::kRead || a == Access::kCas) continue;
    points.insert(i);
    if (i + 1 < probe.trace.size()) points.insert(i + 1);
  }
  FuzzReport report;
  for (std::size_t i : points) {
    config.schedule.crash_points = {probe.trace[i].step};
    CaseOutcome outcome = evaluate(config);
    outcome.crash_classes = {probe.trace_classes[i]};
    report.add(outcome);
  }
  return report;
}

}  // namespace dfc::harness

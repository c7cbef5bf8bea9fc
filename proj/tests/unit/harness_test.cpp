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
#include <gtest/gtest.h>

#include <set>

#include "dfc/harness/schedule_io.hpp"
#include "test_util.hpp"

namespace dfc::harness {
namespace {

std::vector<Response> replay(StructureKind kind, const std::vector<OpSpec>& ops) {
  return sequential_oracle(kind, ops);
}

TEST(Oracle, StackQueueDequeBasics) {
  const Response A = Response::ack(), E = Response::empty();
  EXPECT_EQ(replay(StructureKind::kStack, {{OpName::kPush, 1}, {OpName::kPush, 2}, {OpName::kPop, 0},
                                           {OpName::kPop, 0}, {OpName::kPop, 0}}),
            (std::vector<Response>{A, A, Response::value(2), Response::value(1), E}));
  EXPECT_EQ(replay(StructureKind::kQueue, {{OpName::kEnqueue, 1}, {OpName::kEnqueue, 2}, {OpName::kDequeue, 0}}),
            (std::vector<Response>{A, A, Response::value(1)}));
  EXPECT_EQ(replay(StructureKind::kDeque, {{OpName::kPushFront, 1}, {OpName::kPushRear, 2}, {OpName::kPopRear, 0},
                                           {OpName::kPopFront, 0}}),
            (std::vector<Response>{A, A, Response::value(2), Response::value(1)}));
}

TEST(Runner, EmptyScheduleGivesEmptyHistory) {
  RunConfig config;
  config.threads = 2;
  config.scripts = {{}, {}};
  const RunResult r = run_schedule(config);
  EXPECT_TRUE(r.history.ops.empty());
  EXPECT_TRUE(r.history.complete);
  EXPECT_EQ(r.steps, 0u);
}

TEST(Runner, OneThreadPushPop) {
  const RunResult r =
      run_schedule(testing::single_thread(StructureKind::kStack, {{OpName::kPush, 3}, {OpName::kPop, 0}}));
  ASSERT_EQ(r.history.ops.size(), 2u);
  EXPECT_EQ(r.history.ops[0].response, Response::ack());
  EXPECT_EQ(r.history.ops[1].response, Response::value(3));
}

TEST(Runner, SameScheduleReplaysIdentically) {
  for (StructureKind kind : {StructureKind::kStack, StructureKind::kQueue, StructureKind::kDeque}) {
    RunConfig config;
    config.kind = kind;
    config.threads = 5;
    config.scripts = generate_scripts(kind, 5, 40, 9);
    config.schedule.seed = 77;
    config.schedule.crash_points = {400, 900};
    config.policy = CrashPolicy::randomized(4);
    config.record_trace = true;
    const RunResult a = run_schedule(config);
    const RunResult b = run_schedule(config);
    EXPECT_EQ(a.history.to_text(), b.history.to_text());
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      ASSERT_EQ(a.trace[i].thread, b.trace[i].thread);
      ASSERT_EQ(a.trace[i].addr, b.trace[i].addr);
      ASSERT_EQ(a.trace[i].value, b.trace[i].value);
    }
    EXPECT_EQ(a.history.crashes.size(), 2u);
  }
}

TEST(Runner, ExplicitSlicesDriveTheInterleaving) {
  RunConfig config;
  config.threads = 2;
  config.scripts = {{{OpName::kPush, 1}}, {{OpName::kPush, 2}}};
  config.schedule.slices = {{2, 1000}, {1, 1000}};
  config.record_trace = true;
  const RunResult r = run_schedule(config);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.front().thread, 2u);
  // Thread 2 finishes first, so its push ends up below thread 1's.
  EXPECT_EQ(r.history.final_contents, (std::vector<Word>{1, 2}));
}

TEST(Runner, RoundRobinAlternatesThreads) {
  RunConfig config;
  config.threads = 3;
  config.scripts = generate_scripts(StructureKind::kStack, 3, 3, 1);
  config.schedule.round_robin = true;
  config.record_trace = true;
  const RunResult r = run_schedule(config);
  ASSERT_GE(r.trace.size(), 3u);
  EXPECT_EQ(r.trace[0].thread, 1u);
  EXPECT_EQ(r.trace[1].thread, 2u);
  EXPECT_EQ(r.trace[2].thread, 3u);
}

TEST(Runner, GeneratedScriptsHaveUniqueInsertValues) {
  const auto scripts = generate_scripts(StructureKind::kDeque, 4, 64, 5);
  std::set<Word> values;
  std::size_t inserts = 0, total = 0;
  for (const Script& s : scripts) {
    for (const OpSpec& op : s) {
      ++total;
      EXPECT_TRUE(belongs_to(op.name, StructureKind::kDeque));
      if (is_insert(op.name)) {
        ++inserts;
        values.insert(op.param);
      }
    }
  }
  EXPECT_EQ(total, 64u);
  EXPECT_EQ(values.size(), inserts);
}

TEST(Checker, CrashFreeBalancedRunIsAccepted) {
  RunConfig config;
  config.threads = 4;
  config.scripts = generate_scripts(StructureKind::kStack, 4, 32, 2, true);
  config.schedule.seed = 5;
  const CaseOutcome o = evaluate(config, false);
  EXPECT_TRUE(o.ok()) << o.failure;
  EXPECT_EQ(o.witness.order.size(), 32u);
}

// Corrupt one completed remove and expect a rejection from the witness
// checker; a history the witness accepts must also pass the exhaustive search.
TEST(Checker, CorruptedResponseIsRejected) {
  std::size_t tried = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    CaseRequest req;
    req.kind = static_cast<StructureKind>(seed % 3);
    req.seed = seed;
    req.threads = 3;
    req.ops = 8;
    req.target = static_cast<CrashClass>(seed % kCrashClassCount);
    const CaseOutcome o = run_targeted_case(req);
    ASSERT_TRUE(o.ok()) << o.failure;
    History h = o.result.history;
    auto it = std::find_if(h.ops.begin(), h.ops.end(), [](const OpEvent& e) {
      return e.status == OpStatus::kCompleted && !is_insert(e.name);
    });
    if (it == h.ops.end()) continue;
    ++tried;
    it->response = it->response.is_empty() ? Response::value(12345) : Response::empty();
    const Verdict v = check_durably_linearizable(h);
    EXPECT_FALSE(v.accepted) << h.to_text();
    if (it->response == Response::value(12345)) {
      EXPECT_FALSE(brute_force_linearizable(h).accepted);
    }
  }
  EXPECT_GT(tried, 30u);
}

TEST(Checker, LeakedEffectOfUncommittedPhaseIsRejected) {
  RunConfig config = testing::single_thread(StructureKind::kStack, {{OpName::kPush, 1}, {OpName::kPush, 2}});
  config.schedule.crash_points = {testing::nth_step(config, CrashClass::kValidFlipUnpersisted, Access::kPwb, 1)};
  const CaseOutcome o = evaluate(config);
  ASSERT_TRUE(o.ok()) << o.failure;
  History h = o.result.history;
  ASSERT_EQ(h.ops.at(1).status, OpStatus::kDropped);
  h.final_contents = {2, 1};  // as if the dropped push had leaked
  EXPECT_FALSE(check_durably_linearizable(h).accepted);
  // The exhaustive search lets any crashed op take effect, so only a value
  // nobody inserted is a violation for it.
  EXPECT_TRUE(brute_force_linearizable(h).accepted);
  h.final_contents = {3, 1};
  EXPECT_FALSE(brute_force_linearizable(h).accepted);
}

TEST(Checker, StampsMustBeCommitted) {
  RunResult r = run_schedule(testing::single_thread(StructureKind::kQueue, {{OpName::kEnqueue, 1}}));
  History h = r.history;
  h.ops[0].stamp = h.final_epoch;  // a phase that never committed
  EXPECT_FALSE(check_durably_linearizable(h).accepted);
}

TEST(Checker, BruteForceSkipsLargeHistories) {
  RunConfig config;
  config.threads = 2;
  config.scripts = generate_scripts(StructureKind::kStack, 2, 12, 3);
  const RunResult r = run_schedule(config);
  EXPECT_TRUE(brute_force_linearizable(r.history).skipped);
  EXPECT_TRUE(brute_force_linearizable(r.history, 12).accepted);
}

TEST(Detectability, WrongRecoveredValueIsCaught) {
  RunConfig config = testing::single_thread(StructureKind::kStack, {{OpName::kPush, 1}, {OpName::kPop, 0}});
  config.schedule.crash_points = {testing::nth_step(config, CrashClass::kBeforeReadyBit, Access::kWrite, 1)};
  const CaseOutcome o = evaluate(config);
  ASSERT_TRUE(o.ok()) << o.failure;
  EXPECT_EQ(o.detectability.executed_pending, 1u);
  History h = o.result.history;
  h.recoveries.at(0).response = Response::ack();
  EXPECT_FALSE(check_detectable(h, check_durably_linearizable(h)).accepted);
}

TEST(Targeted, EveryClassCanBeHitOnEveryStructure) {
  for (StructureKind kind : {StructureKind::kStack, StructureKind::kQueue, StructureKind::kDeque}) {
    for (std::size_t c = 0; c < kCrashClassCount; ++c) {
      CaseRequest req;
      req.kind = kind;
      req.seed = 40 + c;
      req.target = static_cast<CrashClass>(c);
      const CaseOutcome o = run_targeted_case(req);
      EXPECT_TRUE(o.ok()) << o.failure;
      ASSERT_FALSE(o.crash_classes.empty());
      const CrashClass hit = req.target == CrashClass::kMidRecovery ? o.crash_classes.back() : o.crash_classes.front();
      EXPECT_EQ(hit, *req.target) << to_string(kind);
    }
  }
}

TEST(Targeted, LateArrivalsHappenAndNeverRepeat) {
  std::uint64_t late = 0, worst = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    RunConfig config;
    config.threads = 6;
    config.scripts = generate_scripts(StructureKind::kStack, 6, 48, seed);
    config.schedule.seed = seed;
    const RunResult r = run_schedule(config);
    late += r.stats.late_arrivals;
    worst = std::max(worst, r.max_late_per_op);
  }
  EXPECT_GT(late, 0u);
  EXPECT_EQ(worst, 1u);
}

TEST(Sweep, CrashAtEveryPersistenceBoundary) {
  for (StructureKind kind : {StructureKind::kStack, StructureKind::kQueue, StructureKind::kDeque}) {
    const FuzzReport r = run_boundary_sweep(kind, CrashPolicy::persisted_only(), 3, 2, 6);
    EXPECT_TRUE(r.ok()) << (r.first_failure ? r.first_failure->failure : "");
    EXPECT_GT(r.runs, 50u);
    for (std::size_t c = 0; c + 1 < kCrashClassCount; ++c) EXPECT_GT(r.class_hits[c], 0u) << c;
  }
}

TEST(Fuzz, SmallBatchPassesUnderEveryPolicy) {
  for (auto mode : {CrashPolicy::Mode::kPersistedOnly, CrashPolicy::Mode::kRandomized,
                    CrashPolicy::Mode::kAdversarialPrefix}) {
    FuzzOptions options;
    options.kind = StructureKind::kDeque;
    options.policy = mode;
    options.schedules = 40;
    const FuzzReport r = run_fuzz(options);
    EXPECT_TRUE(r.ok()) << (r.first_failure ? r.first_failure->failure : "");
    EXPECT_GT(r.memory_checks, 0u);
  }
}

TEST(ScheduleIo, JsonRoundTrip) {
  RunConfig config;
  config.kind = StructureKind::kQueue;
  config.threads = 2;
  config.scripts = {{{OpName::kEnqueue, 4}, {OpName::kDequeue, 0}}, {{OpName::kDequeue, 0}}};
  config.schedule.slices = {{1, 3}, {2, 5}};
  config.schedule.crash_points = {10, 30};
  config.schedule.seed = 8;
  config.policy = CrashPolicy::randomized(6);
  const RunConfig back = parse_run_config(to_json(config));
  EXPECT_EQ(back.kind, config.kind);
  EXPECT_EQ(back.threads, 2u);
  EXPECT_EQ(back.schedule, config.schedule);
  EXPECT_EQ(back.policy.mode, config.policy.mode);
  EXPECT_EQ(back.policy.seed, 6u);
  ASSERT_EQ(back.scripts.size(), 2u);
  EXPECT_EQ(back.scripts[0][0].name, OpName::kEnqueue);
  EXPECT_EQ(back.scripts[0][0].param, 4u);
  EXPECT_EQ(run_schedule(back).history.to_text(), run_schedule(config).history.to_text());
}

TEST(ScheduleIo, GeneratedScriptsAndErrors) {
  const RunConfig c = parse_run_config(R"({"kind": "deque", "threads": 3, "ops": 12, "crash_points": [50]})");
  EXPECT_EQ(c.scripts.size(), 3u);
  EXPECT_THROW(parse_run_config(R"({"kind": "heap"})"), Fault);
  EXPECT_THROW(parse_run_config("{"), Fault);
  EXPECT_THROW(parse_run_config(R"({"kind": "stack", "scripts": [[["enq", 1]]]})"), Fault);
}

TEST(ScheduleIo, CounterexampleMarksTheCrash) {
  RunConfig config = testing::single_thread(StructureKind::kStack, {{OpName::kPush, 1}});
  config.schedule.crash_points = {5};
  const CaseOutcome o = evaluate(config);
  std::ostringstream out;
  write_counterexample(out, o);
  EXPECT_NE(out.str().find("first access after a crash"), std::string::npos);
  EXPECT_NE(out.str().find("history stack"), std::string::npos);
}

}  // namespace
}  // namespace dfc::harness

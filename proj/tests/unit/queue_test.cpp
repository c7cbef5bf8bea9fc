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

#include <deque>

#include "test_util.hpp"

namespace dfc {
namespace {

using harness::CrashClass;
using testing::Batch;

TEST(Queue, LoneThreadIsFifo) {
  SimulatedNvm nvm;
  DfcQueue q(nvm, CombinerConfig{1, 64, "q"});
  const ThreadCtx t = q.register_thread();
  EXPECT_EQ(q.dequeue(t), Response::empty());
  EXPECT_EQ(q.enqueue(t, 1), Response::ack());
  EXPECT_EQ(q.enqueue(t, 2), Response::ack());
  EXPECT_EQ(q.contents(), (std::vector<Word>{1, 2}));
  EXPECT_EQ(q.dequeue(t), Response::value(1));
  EXPECT_EQ(q.dequeue(t), Response::value(2));
  EXPECT_EQ(q.dequeue(t), Response::empty());
}

TEST(Queue, LastDequeueClearsBothEnds) {
  SimulatedNvm nvm;
  DfcQueue q(nvm, CombinerConfig{1, 64, "q"});
  const ThreadCtx t = q.register_thread();
  q.enqueue(t, 3);
  EXPECT_EQ(q.peek_head(), q.peek_tail());
  EXPECT_FALSE(q.peek_head().is_none());
  q.dequeue(t);
  EXPECT_TRUE(q.peek_head().is_none());
  EXPECT_TRUE(q.peek_tail().is_none());
}

TEST(Queue, EnqueuesApplyBeforeDequeuesInOnePhase) {
  SimulatedNvm nvm;
  DfcQueue q(nvm, CombinerConfig{3, 64, "q"});
  const auto t = testing::register_all(q);
  Batch b(q);
  b.add(t[0], OpName::kDequeue);
  b.add(t[1], OpName::kEnqueue, 10);
  b.add(t[2], OpName::kEnqueue, 20);
  b.run();
  // Same-phase dequeue on an empty queue still receives the first enqueue.
  EXPECT_EQ(b.items[0].response, Response::value(10));
  EXPECT_EQ(q.contents(), (std::vector<Word>{20}));
  EXPECT_EQ(b.phases.front().reduce_result, (std::array<std::int64_t, 2>{1, 0}));
  EXPECT_EQ(b.phases.front().eliminated_pairs, 0u);
}

TEST(Queue, CollectIndicesTrackTheLastEntryOfEachList) {
  SimulatedNvm nvm;
  DfcQueue q(nvm, CombinerConfig{4, 64, "q"});
  const auto t = testing::register_all(q);
  {
    Batch b(q);
    b.add(t[0], OpName::kEnqueue, 1);
    b.add(t[1], OpName::kEnqueue, 2);
    b.add(t[2], OpName::kEnqueue, 3);
    b.run();
    EXPECT_EQ(b.phases.front().reduce_result, (std::array<std::int64_t, 2>{2, -1}));
    // Slots 2 and 3 find their phase done and run empty phases.
    EXPECT_EQ(b.phases.back().reduce_result, (std::array<std::int64_t, 2>{-1, -1}));
  }
  {
    Batch b(q);
    b.add(t[0], OpName::kEnqueue, 4);
    b.add(t[1], OpName::kDequeue);
    b.add(t[2], OpName::kEnqueue, 5);
    b.add(t[3], OpName::kDequeue);
    b.run();
    EXPECT_EQ(b.phases.front().reduce_result, (std::array<std::int64_t, 2>{1, 1}));
    EXPECT_EQ(b.items[1].response, Response::value(1));
    EXPECT_EQ(b.items[3].response, Response::value(2));
  }
  EXPECT_EQ(q.contents(), (std::vector<Word>{3, 4, 5}));
}

TEST(Queue, RandomBatchesMatchAStdDeque) {
  SimulatedNvm nvm;
  DfcQueue q(nvm, CombinerConfig{4, 512, "q"});
  const auto t = testing::register_all(q);
  std::deque<Word> model;
  std::mt19937_64 rng(3);
  Word next = 1;
  for (int round = 0; round < 100; ++round) {
    Batch b(q);
    std::vector<std::size_t> enq, deq;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (rng() % 2) {
        b.add(t[i], OpName::kEnqueue, next++);
        enq.push_back(i);
      } else {
        b.add(t[i], OpName::kDequeue);
        deq.push_back(i);
      }
    }
    b.run();
    for (std::size_t i : enq) model.push_back(b.items[i].param);
    for (std::size_t i : deq) {
      if (model.empty()) {
        EXPECT_EQ(b.items[i].response, Response::empty());
      } else {
        EXPECT_EQ(b.items[i].response, Response::value(model.front()));
        model.pop_front();
      }
    }
    ASSERT_EQ(q.contents(), std::vector<Word>(model.begin(), model.end()));
  }
}

TEST(Queue, PhaseCostsTwoPfence) {
  SimulatedNvm nvm;
  DfcQueue q(nvm, CombinerConfig{2, 64, "q"});
  const auto t = testing::register_all(q);
  Batch b(q);
  b.add(t[0], OpName::kEnqueue, 1);
  b.add(t[1], OpName::kDequeue);
  b.run();
  for (const PhaseRecord& r : b.phases) {
    EXPECT_EQ(r.combiner_cost.pfence, 2u);
    EXPECT_EQ(r.combiner_cost.pwb, r.nodes_flushed + r.collected.size() + r.roots_flushed + 1);
  }
}

TEST(QueueRecovery, CrashScenariosApplyOnceOrNotAtAll) {
  const harness::Script script{{OpName::kEnqueue, 1}, {OpName::kEnqueue, 2}, {OpName::kDequeue, 0}};
  struct Case {
    CrashClass c;
    Access access;
    std::size_t nth;
    harness::OpStatus status;
  };
  const Case cases[] = {
      {CrashClass::kValidFlipUnpersisted, Access::kPwb, 2, harness::OpStatus::kDropped},
      {CrashClass::kBeforeReadyBit, Access::kWrite, 2, harness::OpStatus::kExecuted},
      {CrashClass::kOddEpochUnpersisted, Access::kPwb, 2, harness::OpStatus::kExecuted},
      {CrashClass::kOddEpochPersisted, Access::kWrite, 2, harness::OpStatus::kExecuted},
  };
  for (const Case& c : cases) {
    harness::RunConfig config = testing::single_thread(StructureKind::kQueue, script);
    config.schedule.crash_points = {testing::nth_step(config, c.c, c.access, c.nth)};
    const harness::CaseOutcome o = harness::evaluate(config);
    ASSERT_TRUE(o.ok()) << to_string(c.c) << ": " << o.failure;
    const auto& h = o.result.history;
    EXPECT_EQ(h.ops.at(2).status, c.status) << to_string(c.c);
    if (c.status == harness::OpStatus::kExecuted) {
      EXPECT_EQ(h.recoveries.at(0).response, Response::value(1));
      EXPECT_EQ(h.final_contents, (std::vector<Word>{2}));
    } else {
      EXPECT_EQ(h.recoveries.at(0).response, Response::ack());
      EXPECT_EQ(h.final_contents, (std::vector<Word>{1, 2}));
    }
  }
}

}  // namespace
}  // namespace dfc

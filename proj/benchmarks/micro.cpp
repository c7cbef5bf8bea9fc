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
// Microbenchmarks of the simulator and the combining protocol. The workload
// figures that matter (pwb and pfence per op, phases per op) come from
// `dfc bench`; these measure host-side cost only.

#include <benchmark/benchmark.h>

#include <memory>

#include "dfc/bench/bench.hpp"
#include "dfc/dfc.hpp"

namespace {

void BM_NvmWritePwbFence(benchmark::State& state) {
  dfc::NvmConfig config;
  config.track_history = state.range(0) != 0;
  dfc::SimulatedNvm nvm(config);
  const dfc::RegionId r = nvm.open_region("bm", 1024, dfc::Durability::kPersistent);
  std::size_t i = 0;
  for (auto _ : state) {
    const dfc::PersistentAddress a{r, i++ % 1024};
    nvm.mem_write(a, i, 0);
    nvm.pwb(a, 0);
    nvm.pfence(0);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NvmWritePwbFence)->Arg(0)->Arg(1);

// Lone thread: every op is its own phase.
void BM_SoloExecute(benchmark::State& state) {
  const auto kind = static_cast<dfc::StructureKind>(state.range(0));
  dfc::NvmConfig nvm_config;
  nvm_config.track_history = false;
  dfc::SimulatedNvm nvm(nvm_config);
  dfc::CombinerConfig config;
  config.threads = 1;
  auto s = dfc::make_structure(kind, nvm, config);
  const dfc::ThreadCtx ctx = s->register_thread();
  const dfc::OpName insert = kind == dfc::StructureKind::kStack   ? dfc::OpName::kPush
                             : kind == dfc::StructureKind::kQueue ? dfc::OpName::kEnqueue
                                                                  : dfc::OpName::kPushFront;
  const dfc::OpName remove = kind == dfc::StructureKind::kStack   ? dfc::OpName::kPop
                             : kind == dfc::StructureKind::kQueue ? dfc::OpName::kDequeue
                                                                  : dfc::OpName::kPopRear;
  dfc::Word v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s->execute(ctx, insert, ++v));
    benchmark::DoNotOptimize(s->execute(ctx, remove, 0));
  }
  state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_SoloExecute)->DenseRange(0, 2)->ArgName("kind");

// Whole workload under the fiber scheduler; reports the model counters.
void BM_Workload(benchmark::State& state) {
  dfc::bench::WorkloadSpec spec;
  spec.workload = static_cast<dfc::bench::Workload>(state.range(0));
  spec.threads = static_cast<std::size_t>(state.range(1));
  spec.ops = 3200;
  dfc::bench::RepMetrics m;
  std::uint64_t seed = 1;
  for (auto _ : state) m = dfc::bench::run_once(spec, seed++);
  const double ops = static_cast<double>(m.ops);
  state.counters["pwb_core_per_op"] = static_cast<double>(m.pwb_core) / ops;
  state.counters["phases_per_op"] = static_cast<double>(m.phases) / ops;
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(m.ops));
}
BENCHMARK(BM_Workload)
    ->ArgsProduct({{0, 1, 2, 3, 4}, {1, 4, 16, 32}})
    ->ArgNames({"workload", "threads"})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

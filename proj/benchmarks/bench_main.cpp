/*
 * Copyright 2026 The dsim Authors
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

#include <benchmark/benchmark.h>

#include <vector>

#include "dsim/engine.hpp"
#include "dsim/hierarchy.hpp"
#include "dsim/interconnect.hpp"
#include "dsim/workload.hpp"

namespace {

using namespace dsim;

void BM_Engine(benchmark::State& state) {
  const auto scheme = static_cast<Scheme>(state.range(0));
  WorkloadParams p;
  p.num_accesses = 50000;
  p.footprint_pages = 4096;
  p.spatial_locality = 0.4;
  std::vector<AccessTrace> traces{gen_synthetic_trace(p, 1)};
  auto cmap = gen_compressibility_map(4096, CompressibilityDist::uniform(1.0, 4.0), 2);
  SimConfig cfg;
  cfg.scheme = scheme;
  cfg.footprint_pages = 4096;
  cfg.net_bandwidth_factor = 8.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(cfg, traces, &cmap));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.num_accesses));
  state.SetLabel(std::string(to_string(scheme)));
}
BENCHMARK(BM_Engine)
    ->DenseRange(static_cast<int>(Scheme::Local), static_cast<int>(Scheme::DaeMon))
    ->Unit(benchmark::kMillisecond);

void BM_DrrArbitrate(benchmark::State& state) {
  LinkState::Params lp;
  lp.bandwidth_bytes_per_ns = 2.0;
  lp.partitioned = true;
  lp.weight_sub = 3;
  lp.weight_page = 1;
  lp.segment_bytes = static_cast<std::uint64_t>(state.range(0));
  LinkState link(lp);
  Packet line;
  line.kind = PacketKind::LineReply;
  line.payload_bytes = 64;
  line.header_bytes = 16;
  Packet page = line;
  page.kind = PacketKind::PageReply;
  page.payload_bytes = 4096;
  TimeNs t = 0;
  for (auto _ : state) {
    if (link.queued(ChannelName::SubBlock) < 8) link.enqueue(ChannelName::SubBlock, line, t);
    if (link.queued(ChannelName::Page) < 2) link.enqueue(ChannelName::Page, page, t);
    benchmark::DoNotOptimize(link.arbitrate(t));
    t = link.busy_until();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DrrArbitrate)->Arg(0)->Arg(256);

void BM_LlcAccessFill(benchmark::State& state) {
  Llc llc(16384, 16, 64);
  Rng rng(3);
  for (auto _ : state) {
    const PageId page = rng.uniform_below(8192);
    const auto line = static_cast<LineIndex>(rng.uniform_below(64));
    if (llc.access(page, line, false) == LlcResult::Miss)
      benchmark::DoNotOptimize(llc.fill(page, line, false));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LlcAccessFill);

void BM_TraceGeneration(benchmark::State& state) {
  WorkloadParams p;
  p.num_accesses = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(gen_synthetic_trace(p, 7));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_TraceGeneration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

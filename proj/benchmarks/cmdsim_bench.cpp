#include <benchmark/benchmark.h>

#include "cmdsim/config.hpp"
#include "cmdsim/dedup_engine.hpp"
#include "cmdsim/generator.hpp"
#include "cmdsim/simulator.hpp"

using namespace cmdsim;

namespace {

const std::vector<TraceRecord>& bench_trace() {
  static const std::vector<TraceRecord> trace = [] {
    GenParams p;
    p.seed = 1;
    p.n_blocks = 1 << 14;
    p.n_records = 200'000;
    p.readonly_set_size = 1024;
    p.readonly_rereads = 4;
    return generate_trace(p);
  }();
  return trace;
}

void BM_Simulate(benchmark::State& state) {
  const Mode mode = kAllModes[state.range(0)];
  const auto& trace = bench_trace();
  for (auto _ : state) benchmark::DoNotOptimize(run(trace, SimConfig::full_system(), mode));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
  state.SetLabel(to_string(mode));
}
BENCHMARK(BM_Simulate)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_Fingerprint(benchmark::State& state) {
  LineData line{};
  for (std::size_t i = 0; i < line.size(); ++i) line[i] = static_cast<Word>(i * 2654435761u);
  Word salt = 0;
  for (auto _ : state) {
    line[0] = ++salt;
    benchmark::DoNotOptimize(fingerprint(CanonicalBlock::from_line(SectorMask::full(), line)));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(sizeof(line)));
}
BENCHMARK(BM_Fingerprint);

// Lookup-then-insert on a full store; half the digests repeat.
void BM_HashStoreChurn(benchmark::State& state) {
  HashStore store(kDefaultHashEntries);
  std::vector<Fingerprint> digests;
  LineData line{};
  for (Word i = 0; i < 8192; ++i) {
    line[0] = i % 2 ? i : i % 64;
    digests.push_back(fingerprint(CanonicalBlock::from_line(SectorMask::full(), line)));
  }
  std::uint64_t frame = 0;
  std::size_t k = 0;
  for (auto _ : state) {
    const Fingerprint& d = digests[k++ % digests.size()];
    if (!store.lookup(d).duplicate) benchmark::DoNotOptimize(store.insert(d, FrameAddr{frame++}));
  }
}
BENCHMARK(BM_HashStoreChurn);

}  // namespace
BENCHMARK_MAIN();

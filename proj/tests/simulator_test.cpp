#include <gtest/gtest.h>

#include "cmdsim/generator.hpp"
#include "cmdsim/oracle.hpp"
#include "cmdsim/simulator.hpp"
#include "helpers.hpp"

using namespace cmdsim;
using namespace cmdsim::test;

TEST(Simulator, CarScenarioThroughTheL2) {
  auto c = ramp_payload(SectorMask::full(), 1000);
  std::vector<TraceRecord> t{W(0, "1111", c), W(1, "1111", c)};
  SimConfig cfg = tiny_config();
  Simulator sim(cfg, Mode::DedupCar, 64);
  sim.run(t);
  sim.flush();
  ASSERT_EQ(sim.controller(0).metadata().peek(BlockAddr{1}).flag, TypeFlag::Inter);
  sim.read(BlockAddr{0}, 0);
  EXPECT_EQ(sim.report().counts.data_read, 1u);
  sim.read(BlockAddr{1}, 0);
  auto r = sim.report();
  EXPECT_EQ(r.counts.car_copy, 1u);
  EXPECT_EQ(r.counts.data_read, 1u);
}

TEST(Simulator, FlushEmptiesCacheAndFifo) {
  SimConfig cfg = tiny_config(4);
  Simulator sim(cfg, Mode::Cmd, 64);
  for (std::uint64_t b = 0; b < 10; ++b) sim.read(BlockAddr{b}, 0);
  EXPECT_FALSE(sim.l2(0).fifo().empty());
  sim.write(BlockAddr{20}, mask("1000"), ramp_payload(mask("1000"), 1));
  sim.flush();
  EXPECT_TRUE(sim.l2(0).fifo().empty());
  EXPECT_EQ(sim.report().dedup.writebacks, 1u);
  for (std::uint64_t b = 0; b < 10; ++b) EXPECT_FALSE(sim.l2(0).resident(BlockAddr{b}, 0));
}

TEST(Simulator, FifoHitAvoidsReadOnlyDram) {
  SimConfig cfg = tiny_config(4);
  Simulator cmd(cfg, Mode::Cmd, 64);
  Simulator car(cfg, Mode::DedupCar, 64);
  for (int pass = 0; pass < 3; ++pass) {
    for (std::uint64_t b = 0; b < 6; ++b) {
      cmd.read(BlockAddr{b}, 0);
      car.read(BlockAddr{b}, 0);
    }
  }
  EXPECT_EQ(car.report().counts.read_only, 18u);  // 6 lines cycle through 4 ways
  EXPECT_EQ(cmd.report().counts.read_only, 6u);   // the FIFO holds the overflow
  EXPECT_EQ(cmd.report().counts.fifo_hit, 12u);
}

TEST(Simulator, ViolationCarriesRecordIndex) {
  std::vector<TraceRecord> t{W(1, "1000", ramp_payload(mask("1000"), 1)), R(1, 0), R(1, 2)};
  SimConfig cfg = tiny_config();
  try {
    run(t, cfg, Mode::Dedup);
    FAIL() << "accepted an ill-formed trace";
  } catch (const TraceViolation& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Simulator, OutOfRangeBlock) {
  SimConfig cfg = tiny_config();
  cfg.n_blocks = 8;
  std::vector<TraceRecord> t{R(9, 0)};
  EXPECT_THROW(run(t, cfg, Mode::Dedup), TraceViolation);
}

TEST(Simulator, AddressSpaceRoundedToPartitions) {
  SimConfig cfg = tiny_config();
  cfg.cache.n_partitions = 4;
  cfg.cache.capacity_bytes = 4 * 128 * 4;
  std::vector<TraceRecord> t{R(9, 0)};
  EXPECT_EQ(resolve_n_blocks(cfg, t), 12u);
}

TEST(Simulator, AllReadsCmdNeverWorseThanBaseline) {
  std::vector<TraceRecord> t;
  for (int pass = 0; pass < 4; ++pass) {
    for (std::uint64_t b = 0; b < 6; ++b) t.push_back(R(b, pass % 4));
  }
  SimConfig cfg = tiny_config(16);
  auto base = run(t, cfg, Mode::Baseline);
  auto cmd = run(t, cfg, Mode::Cmd);
  EXPECT_LE(cmd.counts.read_only, base.counts.read_only);
}

TEST(Simulator, AllIntraTraceWritesNothing) {
  GenParams p;
  p.intra_prob = 1;
  p.n_records = 3000;
  p.n_blocks = 256;
  p.mask_distribution = {0, 0, 0, 1};  // partial merges of different words are not uniform
  auto t = generate_trace(p);
  SimConfig cfg = SimConfig::full_system();
  auto r = run(t, cfg, Mode::Dedup);
  EXPECT_EQ(r.dedup.inter_removed, 0u);
  EXPECT_EQ(r.counts.write, 0u);
  EXPECT_GT(r.dedup.intra_removed, 0u);
}

TEST(Simulator, WritePathInertWithoutWrites) {
  GenParams p;
  p.write_fraction = 0;
  p.n_records = 4000;
  p.n_blocks = 512;
  auto t = generate_trace(p);
  SimConfig cfg = tiny_config(0);
  cfg.cache.capacity_bytes = 8 * 1024;
  auto base = run(t, cfg, Mode::Baseline);
  auto dedup = run(t, cfg, Mode::Dedup);
  EXPECT_EQ(base.counts.read_only, dedup.counts.read_only);
  EXPECT_EQ(base.counts.data_read, dedup.counts.data_read);
}

TEST(Simulator, WriteReductionMatchesOraclePrediction) {
  GenParams p;
  p.n_records = 6000;
  p.n_blocks = 300;
  p.write_fraction = 0.7;
  p.intra_prob = 0.25;
  p.inter_pool_size = 16;
  auto t = generate_trace(p);
  SimConfig cfg = tiny_config();
  cfg.cache.capacity_bytes = 16 * 1024;
  cfg.flush_at_end = true;

  SimConfig resolved = cfg;
  resolved.n_blocks = resolve_n_blocks(cfg, t);
  Simulator sim(resolved, Mode::Dedup, resolved.n_blocks);
  sim.set_recording(true);
  sim.run(t);
  sim.flush();
  std::vector<TraceRecord> stream;
  for (const auto& ev : sim.writeback_log()) {
    stream.push_back(TraceRecord::write(ev.request.blk, ev.request.mask, ev.request.payload));
  }
  auto oracle = oracle::oracle_replay(stream, cfg.seed);
  std::uint64_t predicted_removed = 0;
  for (const auto& c : oracle.writes) predicted_removed += c.kind != oracle::Kind::Unique;

  auto base = run(t, cfg, Mode::Baseline);
  auto dedup = run(t, cfg, Mode::Dedup);
  ASSERT_EQ(base.counts.write, stream.size());
  EXPECT_EQ(base.counts.write - dedup.counts.write, predicted_removed);
  double predicted_pct = 100.0 * static_cast<double>(predicted_removed) / static_cast<double>(stream.size());
  EXPECT_NEAR(reduction_pct(base.counts.write, dedup.counts.write), predicted_pct, 0.005);
}

TEST(Simulator, ReportIsDeterministic) {
  GenParams p;
  p.n_records = 2000;
  p.n_blocks = 128;
  p.readonly_set_size = 8;
  p.readonly_rereads = 4;
  auto t = generate_trace(p);
  SimConfig cfg = tiny_config(8);
  cfg.cache.capacity_bytes = 4096;
  for (Mode m : kAllModes) {
    EXPECT_EQ(emit(run(t, cfg, m), ReportFormat::Json), emit(run(t, cfg, m), ReportFormat::Json));
  }
}

TEST(Simulator, InvariantsHoldMidRun) {
  GenParams p;
  p.n_records = 3000;
  p.n_blocks = 64;
  p.inter_pool_size = 4;
  p.mask_distribution = {0.3, 0.3, 0.2, 0.2};
  auto t = generate_trace(p);
  SimConfig cfg = tiny_config(4);
  cfg.hash_entries = 3;
  cfg.metadata.addr_cache = 64;
  cfg.metadata.type_cache = 32;
  cfg.metadata.mask_cache = 32;
  Simulator sim(cfg, Mode::Cmd, 64);
  for (std::size_t i = 0; i < t.size(); ++i) {
    sim.step(t[i]);
    if (i % 97 == 0) ASSERT_NO_THROW(sim.check_invariants()) << "after record " << i;
  }
  sim.flush();
  sim.check_invariants();
}

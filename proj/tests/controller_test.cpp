#include <gtest/gtest.h>

#include "cmdsim/controller.hpp"
#include "helpers.hpp"

using namespace cmdsim;
using namespace cmdsim::test;

namespace {

struct Rig {
  explicit Rig(Mode mode, std::uint64_t n_blocks = 64) : config(tiny_config()), l2(config.cache, 0, mode == Mode::Cmd),
                                                           mc(config, mode, 0, n_blocks) {}
  SimConfig config;
  SectorCache l2;
  MemoryController mc;

  WriteOutcome write(std::uint64_t blk, const char* m, std::vector<Word> payload) {
    return mc.handle_write({BlockAddr{blk}, mask(m), std::move(payload)});
  }
  ReadOutcome read(std::uint64_t blk, unsigned sector) { return mc.handle_read(BlockAddr{blk}, sector, l2); }
  TypeFlag flag(std::uint64_t blk) const { return mc.metadata().peek(BlockAddr{blk}).flag; }
};

SectorData sector_words(const std::vector<Word>& payload, unsigned slot) {
  SectorData d;
  std::copy_n(payload.begin() + slot * kWordsPerSector, kWordsPerSector, d.begin());
  return d;
}

}  // namespace

TEST(Controller, IdenticalFullLinesDeduplicate) {
  Rig r(Mode::Dedup);
  auto content = ramp_payload(SectorMask::full(), 1000);
  auto a = r.write(1, "1111", content);
  EXPECT_EQ(a.cls, WriteClass::Unique);
  EXPECT_EQ(r.mc.counts().write, 1u);
  auto b = r.write(2, "1111", content);
  EXPECT_EQ(b.cls, WriteClass::Inter);
  EXPECT_EQ(r.mc.counts().write, 1u);
  EXPECT_EQ(b.frame, a.frame);
  EXPECT_EQ(r.mc.frames().refcount(*a.frame), 2u);
  EXPECT_EQ(r.mc.hash_store().find_by_frame(*a.frame)->count, 2);
  EXPECT_EQ(r.flag(1), TypeFlag::Reference);
  EXPECT_EQ(r.flag(2), TypeFlag::Inter);
  EXPECT_EQ(r.mc.dedup_counts().inter_removed, 1u);
  r.mc.check_invariants();
}

TEST(Controller, UniformLineIsIntraWithoutDramWrite) {
  Rig r(Mode::Dedup);
  auto w = r.write(3, "1111", uniform_payload(SectorMask::full(), 0x3f800000));
  EXPECT_EQ(w.cls, WriteClass::Intra);
  EXPECT_EQ(r.mc.counts().write, 0u);
  EXPECT_EQ(r.flag(3), TypeFlag::Intra);
  EXPECT_EQ(r.mc.metadata().peek(BlockAddr{3}).mapping, 0x3f800000u);
  EXPECT_TRUE(r.mc.frames().is_free(FrameAddr{3}));
  r.mc.check_invariants();
}

TEST(Controller, SharedReferenceRewriteRelocates) {
  Rig r(Mode::Dedup);
  auto shared = ramp_payload(SectorMask::full(), 1000);
  auto a = r.write(1, "1111", shared);
  r.write(2, "1111", shared);
  auto fresh = ramp_payload(SectorMask::full(), 5000);
  auto a2 = r.write(1, "1111", fresh);
  EXPECT_EQ(a2.cls, WriteClass::Unique);
  EXPECT_NE(a2.frame, a.frame);
  EXPECT_EQ(r.mc.frames().refcount(*a.frame), 1u);
  EXPECT_EQ(r.read(2, 1).data, sector_words(shared, 1));
  EXPECT_EQ(r.read(1, 1).data, sector_words(fresh, 1));
  r.mc.check_invariants();
}

TEST(Controller, SoleOwnerRewriteReusesItsFrame) {
  Rig r(Mode::Dedup);
  auto a = r.write(5, "1111", ramp_payload(SectorMask::full(), 1));
  auto a2 = r.write(5, "1111", ramp_payload(SectorMask::full(), 2));
  EXPECT_EQ(a.frame, a2.frame);
  EXPECT_EQ(a2.frame->value, 5u);
  EXPECT_EQ(r.mc.hash_store().size(), 1u);
  r.mc.check_invariants();
}

TEST(Controller, ReferenceRewrittenToSameContentStaysPut) {
  Rig r(Mode::Dedup);
  auto c = ramp_payload(SectorMask::full(), 1);
  r.write(5, "1111", c);
  auto again = r.write(5, "1111", c);
  EXPECT_EQ(again.cls, WriteClass::Unique);
  EXPECT_EQ(again.frame->value, 5u);
  EXPECT_EQ(r.mc.counts().write, 2u);
  r.mc.check_invariants();
}

TEST(Controller, InterRewriteDropsReference) {
  Rig r(Mode::Dedup);
  auto c = ramp_payload(SectorMask::full(), 1);
  auto a = r.write(1, "1111", c);
  r.write(2, "1111", c);
  r.write(2, "1111", uniform_payload(SectorMask::full(), 0));
  EXPECT_EQ(r.mc.frames().refcount(*a.frame), 1u);
  EXPECT_EQ(r.mc.hash_store().find_by_frame(*a.frame)->count, 1);
  r.write(1, "1111", uniform_payload(SectorMask::full(), 0));
  EXPECT_TRUE(r.mc.frames().is_free(*a.frame));
  EXPECT_EQ(r.mc.hash_store().size(), 0u);
  r.mc.check_invariants();
}

TEST(Controller, PartialOverlapCostsOneDedupRead) {
  Rig r(Mode::Dedup);
  auto old = ramp_payload(mask("1011"), 100);
  r.write(4, "1011", old);
  auto fresh = ramp_payload(mask("0110"), 900);
  auto w = r.write(4, "0110", fresh);
  EXPECT_TRUE(w.merge_read);
  EXPECT_EQ(r.mc.counts().dedup_read, 1u);
  EXPECT_EQ(w.stored_mask, mask("1111"));
  EXPECT_EQ(r.read(4, 0).data, sector_words(old, 0));
  EXPECT_EQ(r.read(4, 1).data, sector_words(fresh, 0));
  EXPECT_EQ(r.read(4, 2).data, sector_words(fresh, 1));
  EXPECT_EQ(r.read(4, 3).data, sector_words(old, 2));
}

TEST(Controller, CoveringWriteSkipsDedupRead) {
  Rig r(Mode::Dedup);
  r.write(4, "0100", ramp_payload(mask("0100"), 100));
  auto w = r.write(4, "0110", ramp_payload(mask("0110"), 900));
  EXPECT_FALSE(w.merge_read);
  EXPECT_EQ(r.mc.counts().dedup_read, 0u);
  EXPECT_EQ(w.stored_mask, mask("0110"));
}

TEST(Controller, IntraMergeRebuildsFromMapping) {
  Rig r(Mode::Dedup);
  r.write(4, "1000", uniform_payload(mask("1000"), 7));
  auto w = r.write(4, "0001", ramp_payload(mask("0001"), 1));
  EXPECT_FALSE(w.merge_read);
  EXPECT_EQ(r.mc.counts().dedup_read, 0u);
  EXPECT_EQ(w.stored_mask, mask("1001"));
  SectorData sevens;
  sevens.fill(7);
  EXPECT_EQ(r.read(4, 0).data, sevens);
}

TEST(Controller, PartialIntraMergedWithMatchingWordStaysIntra) {
  Rig r(Mode::Dedup);
  r.write(4, "1000", uniform_payload(mask("1000"), 7));
  auto w = r.write(4, "0100", uniform_payload(mask("0100"), 7));
  EXPECT_EQ(w.cls, WriteClass::Intra);
  EXPECT_EQ(w.stored_mask, mask("1100"));
}

TEST(Controller, ReadNeverWrittenIsReadOnly) {
  Rig r(Mode::Dedup);
  auto got = r.read(9, 2);
  EXPECT_EQ(got.dram_class, RequestClass::ReadOnly);
  EXPECT_EQ(got.data, bg_sector(r.config.seed, BlockAddr{9}, 2));
  EXPECT_EQ(r.mc.counts().read_only, 1u);
}

TEST(Controller, IntraReadNeedsNoDram) {
  Rig r(Mode::DedupCar);
  r.write(3, "1111", uniform_payload(SectorMask::full(), 0xabcd));
  for (unsigned s = 0; s < 4; ++s) {
    auto got = r.read(3, s);
    EXPECT_EQ(got.source, ReadSource::IntraMapping);
    for (Word w : got.data) EXPECT_EQ(w, 0xabcdu);
  }
  EXPECT_EQ(r.mc.counts().data_read, 0u);
}

TEST(Controller, CarCopiesCleanReferenceSector) {
  Rig r(Mode::DedupCar);
  auto c = ramp_payload(SectorMask::full(), 1000);
  r.write(1, "1111", c);
  r.write(2, "1111", c);
  r.l2.fill_sector(BlockAddr{1}, 2, sector_words(c, 2), true);
  auto got = r.read(2, 2);
  EXPECT_EQ(got.source, ReadSource::CarCopy);
  EXPECT_EQ(got.data, sector_words(c, 2));
  EXPECT_EQ(r.mc.counts().car_copy, 1u);
  EXPECT_EQ(r.mc.counts().data_read, 0u);
}

TEST(Controller, DirtyReferenceSectorForcesDramRead) {
  Rig r(Mode::DedupCar);
  auto c = ramp_payload(SectorMask::full(), 1000);
  r.write(1, "1111", c);
  r.write(2, "1111", c);
  r.l2.write_sectors(BlockAddr{1}, mask("0010"), ramp_payload(mask("0010"), 77));
  auto got = r.read(2, 2);
  EXPECT_EQ(got.source, ReadSource::Dram);
  EXPECT_EQ(got.dram_class, RequestClass::DataRead);
  EXPECT_EQ(got.data, sector_words(c, 2));
  EXPECT_EQ(r.mc.counts().car_copy, 0u);
}

TEST(Controller, DedupModeHasNoCar) {
  Rig r(Mode::Dedup);
  auto c = ramp_payload(SectorMask::full(), 1000);
  r.write(1, "1111", c);
  r.write(2, "1111", c);
  r.l2.fill_sector(BlockAddr{1}, 2, sector_words(c, 2), true);
  EXPECT_EQ(r.read(2, 2).source, ReadSource::Dram);
  EXPECT_EQ(r.mc.counts().data_read, 1u);
}

TEST(Controller, CarProbesAnyAliasOfTheFrame) {
  Rig r(Mode::DedupCar);
  auto c = ramp_payload(SectorMask::full(), 1000);
  r.write(1, "1111", c);
  r.write(2, "1111", c);
  r.write(3, "1111", c);
  r.l2.fill_sector(BlockAddr{2}, 0, sector_words(c, 0), true);  // fetched under alias 2
  EXPECT_EQ(r.read(3, 0).source, ReadSource::CarCopy);
}

TEST(Controller, UnmaterializedSectorIsATraceViolation) {
  Rig r(Mode::Dedup);
  r.write(4, "1000", ramp_payload(mask("1000"), 1));
  EXPECT_THROW(r.read(4, 3), TraceViolation);
}

TEST(Controller, BaselineClassifiesByWrittenBack) {
  Rig r(Mode::Baseline);
  EXPECT_EQ(r.read(6, 0).dram_class, RequestClass::ReadOnly);
  auto w = r.write(6, "0100", ramp_payload(mask("0100"), 3));
  EXPECT_EQ(w.cls, WriteClass::Direct);
  auto got = r.read(6, 1);
  EXPECT_EQ(got.dram_class, RequestClass::DataRead);
  EXPECT_EQ(got.data, sector_words(ramp_payload(mask("0100"), 3), 0));
  EXPECT_EQ(r.mc.counts().write, 1u);
  EXPECT_EQ(r.mc.counts().metadata_read, 0u);
  EXPECT_EQ(r.mc.events().metadata_hit, 0u);
}

TEST(Controller, MetadataWrittenOnlyWhenChanged) {
  SimConfig cfg = tiny_config();
  cfg.metadata.addr_cache = cfg.metadata.type_cache = cfg.metadata.mask_cache = 32;  // one line each
  MemoryController mc(cfg, Mode::Dedup, 0, 1024);
  SectorCache l2(cfg.cache, 0, false);
  auto c = ramp_payload(SectorMask::full(), 1);
  mc.handle_write({BlockAddr{0}, SectorMask::full(), c});
  mc.handle_read(BlockAddr{512}, 0, l2);  // evicts the dirty type line
  EXPECT_EQ(mc.counts().metadata_write, 1u);
  mc.handle_write({BlockAddr{0}, SectorMask::full(), c});  // flag, mask and frame unchanged
  mc.handle_read(BlockAddr{512}, 0, l2);                   // type line evicted again, clean
  EXPECT_EQ(mc.counts().metadata_write, 1u);
  EXPECT_EQ(mc.counts().metadata_read, mc.metadata().total_misses());
}

TEST(Controller, FrameSurvivesHashEviction) {
  SimConfig cfg = tiny_config();
  cfg.hash_entries = 1;
  MemoryController mc(cfg, Mode::Dedup, 0, 64);
  auto c1 = ramp_payload(SectorMask::full(), 1);
  auto c2 = ramp_payload(SectorMask::full(), 2);
  mc.handle_write({BlockAddr{0}, SectorMask::full(), c1});
  mc.handle_write({BlockAddr{1}, SectorMask::full(), c2});  // evicts c1's entry
  auto again = mc.handle_write({BlockAddr{2}, SectorMask::full(), c1});
  EXPECT_EQ(again.cls, WriteClass::Unique);  // capacity miss
  mc.handle_write({BlockAddr{0}, SectorMask::full(), uniform_payload(SectorMask::full(), 0)});
  mc.check_invariants();
  EXPECT_TRUE(mc.frames().is_free(FrameAddr{0}));
}

TEST(Controller, RejectsMalformedWriteback) {
  Rig r(Mode::Dedup);
  EXPECT_THROW(r.mc.handle_write({BlockAddr{1}, mask("1100"), ramp_payload(mask("1000"), 0)}),
               std::invalid_argument);
  EXPECT_THROW(r.mc.handle_write({BlockAddr{1}, SectorMask{}, {}}), std::invalid_argument);
  EXPECT_THROW(r.read(999, 0), TraceViolation);
}

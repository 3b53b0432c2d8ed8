#include <gtest/gtest.h>

#include "cmdsim/metadata_store.hpp"

using namespace cmdsim;

namespace {

MetadataCacheConfig budgets(std::uint64_t addr, std::uint64_t type, std::uint64_t mask) {
  MetadataCacheConfig c;
  c.addr_cache = addr;
  c.type_cache = type;
  c.mask_cache = mask;
  return c;
}

}  // namespace

TEST(MetadataCache, EntriesPerLine) {
  EXPECT_EQ(entries_per_line(MetaKind::Addr, 32), 8u);
  EXPECT_EQ(entries_per_line(MetaKind::Type, 32), 128u);
  EXPECT_EQ(entries_per_line(MetaKind::Mask, 32), 64u);
}

TEST(MetadataCache, TypeLineCoversBlocks0To127) {
  BlockMetadata m(budgets(1024, 1024, 1024), 0, 1, 1024);
  auto first = m.meta_read(MetaKind::Type, BlockAddr{0});
  EXPECT_FALSE(first.traffic.hit);
  EXPECT_EQ(first.traffic.dram_reads, 1u);
  EXPECT_EQ(first.value, 0u);  // default flag 00
  EXPECT_TRUE(m.meta_read(MetaKind::Type, BlockAddr{64}).traffic.hit);
  EXPECT_TRUE(m.meta_read(MetaKind::Type, BlockAddr{127}).traffic.hit);
  EXPECT_FALSE(m.meta_read(MetaKind::Type, BlockAddr{128}).traffic.hit);
}

TEST(MetadataCache, AddrLineCoversEightBlocks) {
  BlockMetadata m(budgets(1024, 1024, 1024), 0, 1, 1024);
  m.meta_read(MetaKind::Addr, BlockAddr{0});
  EXPECT_TRUE(m.meta_read(MetaKind::Addr, BlockAddr{7}).traffic.hit);
  EXPECT_FALSE(m.meta_read(MetaKind::Addr, BlockAddr{8}).traffic.hit);
}

TEST(MetadataCache, MaskLineCovers64Blocks) {
  BlockMetadata m(budgets(1024, 1024, 1024), 0, 1, 1024);
  m.meta_read(MetaKind::Mask, BlockAddr{0});
  EXPECT_TRUE(m.meta_read(MetaKind::Mask, BlockAddr{63}).traffic.hit);
  EXPECT_FALSE(m.meta_read(MetaKind::Mask, BlockAddr{64}).traffic.hit);
}

TEST(MetadataCache, LinesIndexedByPartitionLocalBlock) {
  // With 8 partitions, partition 3 holds blocks 3, 11, 19, ...; local index
  // blk/8, so blocks 3 and 3 + 8*127 share a type line.
  BlockMetadata m(budgets(1024, 1024, 1024), 3, 8, 8 * 256);
  m.meta_read(MetaKind::Type, BlockAddr{3});
  EXPECT_TRUE(m.meta_read(MetaKind::Type, BlockAddr{3 + 8 * 127}).traffic.hit);
  EXPECT_FALSE(m.meta_read(MetaKind::Type, BlockAddr{3 + 8 * 128}).traffic.hit);
  EXPECT_THROW(m.meta_read(MetaKind::Type, BlockAddr{4}), InvariantError);
}

TEST(MetadataCache, ColdWriteMissesThenRewriteHits) {
  BlockMetadata m(budgets(64, 64, 64), 0, 1, 64);
  auto w = m.meta_write(MetaKind::Mask, BlockAddr{2}, 0b0101);
  EXPECT_FALSE(w.hit);
  EXPECT_EQ(w.dram_reads, 1u);
  EXPECT_TRUE(m.meta_write(MetaKind::Mask, BlockAddr{3}, 0b1111).hit);
  EXPECT_EQ(m.peek(BlockAddr{2}).mask.bits(), 0b0101);
}

TEST(MetadataCache, DirtyEvictionCostsOneWrite) {
  BlockMetadata m(budgets(32, 32, 32), 0, 1, 64);  // one line per cache
  m.meta_write(MetaKind::Addr, BlockAddr{0}, 42);
  auto t = m.meta_read(MetaKind::Addr, BlockAddr{8}).traffic;
  EXPECT_FALSE(t.hit);
  EXPECT_EQ(t.dram_reads, 1u);
  EXPECT_EQ(t.dram_writes, 1u);
  auto clean = m.meta_read(MetaKind::Addr, BlockAddr{16}).traffic;  // victim line 1 is clean
  EXPECT_EQ(clean.dram_writes, 0u);
  EXPECT_EQ(m.total_dirty_evictions(), 1u);
  EXPECT_EQ(m.total_misses(), 3u);
  EXPECT_EQ(m.meta_read(MetaKind::Addr, BlockAddr{0}).value, 42u);  // value persists across eviction
}

TEST(MetadataCache, LruOrder) {
  MetadataCache c(64, 32);  // two lines
  c.access(0, false);
  c.access(1, false);
  c.access(0, false);
  c.access(2, false);  // evicts line 1
  EXPECT_TRUE(c.contains(0));
  EXPECT_FALSE(c.contains(1));
  EXPECT_TRUE(c.contains(2));
}

TEST(MetadataCache, ZeroBudgetIsUnbounded) {
  MetadataCache c(0, 32);
  for (std::uint64_t l = 0; l < 10000; ++l) c.access(l, true);
  EXPECT_EQ(c.dirty_evictions(), 0u);
  EXPECT_EQ(c.size(), 10000u);
}

TEST(MetadataCache, FieldWidthChecked) {
  BlockMetadata m(budgets(64, 64, 64), 0, 1, 64);
  EXPECT_THROW(m.meta_write(MetaKind::Type, BlockAddr{0}, 4), std::invalid_argument);
  EXPECT_THROW(m.meta_write(MetaKind::Mask, BlockAddr{0}, 16), std::invalid_argument);
}

TEST(FrameTable, StartsWithEveryHomeInUse) {
  FrameTable f(0, 1, 16);
  EXPECT_EQ(f.frame_count(), 16u);
  EXPECT_EQ(f.free_count(), 0u);
  EXPECT_TRUE(f.home_in_use(FrameAddr{3}));
  EXPECT_EQ(f.refcount(FrameAddr{3}), 0u);
}

TEST(FrameTable, HomeFramePreferred) {
  FrameTable f(0, 1, 16);
  for (std::uint64_t b : {2, 5, 9}) {
    f.clear_home(BlockAddr{b});
    f.release(FrameAddr{b});
  }
  EXPECT_EQ(f.alloc(BlockAddr{9}).value, 9u);
}

TEST(FrameTable, LowestFreeFrameWhenHomeTaken) {
  FrameTable f(0, 1, 16);
  // Block 3 vacated its home; the frame now carries shared data.
  f.clear_home(BlockAddr{3});
  f.release(FrameAddr{3});
  FrameAddr shared = f.alloc(BlockAddr{7});
  EXPECT_EQ(shared.value, 3u);
  f.add_ref(shared);
  for (std::uint64_t b : {9, 5}) {
    f.clear_home(BlockAddr{b});
    f.release(FrameAddr{b});
  }
  EXPECT_EQ(f.alloc(BlockAddr{3}).value, 5u);
}

TEST(FrameTable, ReleaseFaults) {
  FrameTable f(0, 1, 4);
  EXPECT_THROW(f.release(FrameAddr{1}), InvariantError);  // home still in use
  f.clear_home(BlockAddr{1});
  f.add_ref(FrameAddr{1});
  EXPECT_THROW(f.release(FrameAddr{1}), InvariantError);  // refcount 1
  f.drop_ref(FrameAddr{1});
  f.release(FrameAddr{1});
  EXPECT_TRUE(f.is_free(FrameAddr{1}));
  EXPECT_THROW(f.release(FrameAddr{1}), InvariantError);  // double release
  EXPECT_THROW(f.drop_ref(FrameAddr{2}), InvariantError);
  EXPECT_THROW(f.add_ref(FrameAddr{1}), InvariantError);  // free frame
  EXPECT_THROW(f.claim(FrameAddr{2}), InvariantError);
}

TEST(FrameTable, ExhaustedPoolFaults) {
  FrameTable f(0, 1, 2);
  EXPECT_THROW(f.alloc(BlockAddr{0}), InvariantError);
}

TEST(FrameTable, PartitionOwnership) {
  FrameTable f(1, 4, 16);
  EXPECT_EQ(f.frame_count(), 4u);
  EXPECT_TRUE(f.owns(FrameAddr{13}));
  EXPECT_FALSE(f.owns(FrameAddr{12}));
  EXPECT_FALSE(f.owns(FrameAddr{17}));
  EXPECT_THROW(f.refcount(FrameAddr{2}), InvariantError);
}

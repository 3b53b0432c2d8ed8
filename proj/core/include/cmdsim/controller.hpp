// Deduplicating memory controller of one partition.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <unordered_map>

#include "cmdsim/config.hpp"
#include "cmdsim/dedup_engine.hpp"
#include "cmdsim/metadata_store.hpp"
#include "cmdsim/sector_cache.hpp"
#include "cmdsim/stats_report.hpp"

namespace cmdsim {

enum class WriteClass : std::uint8_t { Direct, Intra, Inter, Unique };

const char* to_string(WriteClass cls);

struct WriteOutcome {
  WriteClass cls = WriteClass::Direct;
  std::optional<FrameAddr> frame;  // frame now backing the block, if any
  bool merge_read = false;         // a DedupRead was issued
  SectorMask stored_mask;
};

enum class ReadSource : std::uint8_t { Dram, IntraMapping, CarCopy };

struct ReadOutcome {
  SectorData data{};
  ReadSource source = ReadSource::Dram;
  std::optional<RequestClass> dram_class;  // DataRead or ReadOnly when source == Dram
};

class TraceViolation : public std::runtime_error {
 public:
  TraceViolation(std::optional<std::size_t> index, const std::string& what);
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

/// Handles L2 writebacks and L2 read misses for the blocks of one partition.
///
/// Baseline stores every block at its home frame. The dedup modes keep a
/// logical-to-physical mapping for every written block: intra blocks live in
/// their mapping entry, duplicates point at a reference frame, everything
/// else owns a frame of its own.
class MemoryController {
 public:
  MemoryController(const SimConfig& config, Mode mode, std::uint32_t partition, std::uint64_t n_blocks);

  WriteOutcome handle_write(const WritebackRequest& wb);
  /// `l2` is this partition's cache; it is only probed, never modified.
  ReadOutcome handle_read(BlockAddr blk, unsigned sector, const SectorCache& l2);

  /// Logical content of a materialized sector as memory holds it, without
  /// touching caches or counters.
  SectorData stored_sector(BlockAddr blk, unsigned sector) const;

  /// Refcount, frame-conservation and hash-store consistency scan.
  /// Throws InvariantError on the first inconsistency.
  void check_invariants() const;

  Mode mode() const { return mode_; }
  const TrafficCounts& counts() const { return counts_; }
  const DedupCounts& dedup_counts() const { return dedup_; }
  const EventCounts& events() const { return events_; }
  const BlockMetadata& metadata() const { return meta_; }
  const FrameTable& frames() const { return frames_; }
  const HashStore& hash_store() const { return store_; }
  /// Logical blocks currently mapped to `frame` (Inter or Reference).
  const std::set<std::uint64_t>* aliases(FrameAddr frame) const;

 private:
  std::uint32_t meta_read(MetaKind kind, BlockAddr blk);
  void meta_write(MetaKind kind, BlockAddr blk, std::uint32_t value);
  void account(const MetaTraffic& t);
  void check_block(BlockAddr blk) const;

  WriteOutcome write_direct(const WritebackRequest& wb);
  ReadOutcome read_direct(BlockAddr blk, unsigned sector);
  SectorData frame_sector(FrameAddr frame, unsigned sector) const;
  void unmap(BlockAddr blk, FrameAddr frame);
  void map(BlockAddr blk, FrameAddr frame);

  Mode mode_;
  std::uint32_t partition_;
  std::uint32_t n_partitions_;
  std::uint64_t n_blocks_;
  std::uint64_t seed_;
  BlockMetadata meta_;
  FrameTable frames_;
  HashStore store_;
  // DRAM contents keyed by frame (dedup modes) or block (baseline).
  std::unordered_map<std::uint64_t, LineData> dram_;
  std::unordered_map<std::uint64_t, SectorMask> baseline_written_;
  std::unordered_map<std::uint64_t, std::set<std::uint64_t>> aliases_;

  TrafficCounts counts_;
  DedupCounts dedup_;
  EventCounts events_;
};

}  // namespace cmdsim

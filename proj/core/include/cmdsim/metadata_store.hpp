// Per-block dedup metadata, its on-chip caches, and the physical frame table.
#pragma once

#include <cstdint>
#include <list>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmdsim/trace.hpp"

namespace cmdsim {

/// Physical 128B frame index. Block b's home frame is frame b.
struct FrameAddr {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(FrameAddr, FrameAddr) = default;
};

/// Raised when simulator bookkeeping detects a broken internal invariant.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// 2-bit block type code.
enum class TypeFlag : std::uint8_t {
  ReadOnly = 0b00,   // untouched; content is the background data at home
  Intra = 0b01,      // all valid words equal; the word lives in the mapping entry
  Inter = 0b10,      // duplicate of a reference frame
  Reference = 0b11,  // reference or non-duplicate; owns its frame
};

const char* to_string(TypeFlag flag);

enum class MetaKind : std::uint8_t { Addr, Type, Mask };

struct MetadataCacheConfig {
  // Byte budgets per partition; 0 means unbounded.
  std::uint64_t addr_cache = 48 * 1024;
  std::uint64_t type_cache = 5 * 1024;
  std::uint64_t mask_cache = 10 * 1024;
  std::uint32_t line_bytes = 32;
  std::uint32_t hit_latency = 20;

  void validate() const;
};

/// Entries of each metadata kind packed into one fetch line.
std::uint32_t entries_per_line(MetaKind kind, std::uint32_t line_bytes);

/// Fully associative LRU cache of metadata lines. Misses fetch a line
/// (write-allocate); evicting a dirty line costs one write.
class MetadataCache {
 public:
  struct Access {
    bool hit = false;
    bool dirty_eviction = false;
  };

  MetadataCache(std::uint64_t budget_bytes, std::uint32_t line_bytes);

  Access access(std::uint64_t line, bool write);
  bool contains(std::uint64_t line) const { return index_.contains(line); }
  std::size_t capacity_lines() const { return capacity_; }  // 0 = unbounded
  std::size_t size() const { return index_.size(); }

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t dirty_evictions() const { return dirty_evictions_; }

 private:
  struct Slot {
    std::uint64_t line;
    bool dirty;
  };
  std::size_t capacity_;
  std::list<Slot> lru_;  // front = most recent
  std::unordered_map<std::uint64_t, std::list<Slot>::iterator> index_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t dirty_evictions_ = 0;
};

/// DRAM side effects of one metadata access.
struct MetaTraffic {
  bool hit = true;
  std::uint32_t dram_reads = 0;
  std::uint32_t dram_writes = 0;
};

struct BlockMeta {
  TypeFlag flag = TypeFlag::ReadOnly;
  std::uint32_t mapping = 0;  // frame (Inter/Reference) or intra word
  SectorMask mask;
};

/// Persistent type/mask/mapping tables of one partition behind their caches.
/// Tables are indexed by partition-local block number (blk / n_partitions).
class BlockMetadata {
 public:
  struct Read {
    std::uint32_t value;
    MetaTraffic traffic;
  };

  BlockMetadata(const MetadataCacheConfig& config, std::uint32_t partition, std::uint32_t n_partitions,
                std::uint64_t n_blocks);

  Read meta_read(MetaKind kind, BlockAddr blk);
  MetaTraffic meta_write(MetaKind kind, BlockAddr blk, std::uint32_t value);

  /// Backing-table view with no cache side effects.
  const BlockMeta& peek(BlockAddr blk) const { return table_.at(local(blk)); }

  const MetadataCache& cache(MetaKind kind) const { return caches_[static_cast<std::size_t>(kind)]; }
  std::uint64_t total_hits() const;
  std::uint64_t total_misses() const;
  std::uint64_t total_dirty_evictions() const;
  std::uint64_t local_blocks() const { return table_.size(); }

 private:
  std::uint64_t local(BlockAddr blk) const;
  MetaTraffic touch(MetaKind kind, BlockAddr blk, bool write);

  MetadataCacheConfig config_;
  std::uint32_t partition_;
  std::uint32_t n_partitions_;
  std::vector<BlockMeta> table_;
  std::vector<MetadataCache> caches_;
};

/// Refcounts and free pool of the frames owned by one partition.
///
/// A frame is occupied while logical blocks map to it (refcount > 0) or while
/// its home block is still untouched and keeps its background data there.
class FrameTable {
 public:
  FrameTable(std::uint32_t partition, std::uint32_t n_partitions, std::uint64_t n_blocks);

  /// Home frame of `requester` if free, else the lowest free frame.
  FrameAddr alloc(BlockAddr requester);
  /// Takes a specific free frame out of the pool.
  void claim(FrameAddr frame);
  /// Returns an ownerless frame to the pool. Faults on live or free frames.
  void release(FrameAddr frame);

  void add_ref(FrameAddr frame);
  /// Decrements and returns the remaining count. Does not free.
  std::uint64_t drop_ref(FrameAddr frame);
  /// The home block stopped storing its background data at home.
  void clear_home(BlockAddr blk);

  std::uint64_t refcount(FrameAddr frame) const { return info(frame).refcount; }
  bool home_in_use(FrameAddr frame) const { return info(frame).home_in_use; }
  bool is_free(FrameAddr frame) const { return free_.contains(frame.value); }
  bool owns(FrameAddr frame) const;
  std::size_t free_count() const { return free_.size(); }
  std::size_t frame_count() const { return frames_.size(); }
  const std::set<std::uint64_t>& free_frames() const { return free_; }

 private:
  struct Info {
    std::uint64_t refcount = 0;
    bool home_in_use = true;
  };
  const Info& info(FrameAddr frame) const;
  Info& info(FrameAddr frame);

  std::uint32_t partition_;
  std::uint32_t n_partitions_;
  std::vector<Info> frames_;
  std::set<std::uint64_t> free_;
};

}  // namespace cmdsim

template <>
struct std::hash<cmdsim::FrameAddr> {
  std::size_t operator()(cmdsim::FrameAddr f) const noexcept { return std::hash<std::uint64_t>{}(f.value); }
};

// One partition of the GPU L2 sector cache plus its read-only victim FIFO.
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "cmdsim/trace.hpp"

namespace cmdsim {

struct CacheConfig {
  std::uint64_t capacity_bytes = 4ull << 20;
  std::uint32_t line_bytes = 128;
  std::uint32_t sectors_per_line = 4;
  std::uint32_t associativity = 16;
  std::uint32_t n_partitions = 1;
  std::uint32_t fifo_entries_per_partition = 16;

  /// Throws std::invalid_argument.
  void validate() const;
  std::uint64_t sets_per_partition() const {
    return capacity_bytes / (std::uint64_t{line_bytes} * associativity * n_partitions);
  }
  std::uint32_t partition_of(BlockAddr blk) const { return static_cast<std::uint32_t>(blk.value % n_partitions); }
};

/// Dirty sectors of an evicted line, payload in canonical sector order.
struct WritebackRequest {
  BlockAddr blk;
  SectorMask mask;
  std::vector<Word> payload;
  friend bool operator==(const WritebackRequest&, const WritebackRequest&) = default;
};

struct FifoEntry {
  BlockAddr blk;
  std::uint8_t sector = 0;
  SectorData data{};
};

enum class LookupOutcome : std::uint8_t { HitCache, HitFifo, Miss };

struct LookupResult {
  LookupOutcome outcome = LookupOutcome::Miss;
  SectorData data{};
  std::optional<WritebackRequest> writeback;  // from the FIFO refill
};

/// Set-associative, LRU, write-back, write-allocate-no-fetch sector cache.
///
/// Evicting a line writes back only its dirty sectors. With the FIFO enabled,
/// the victim's clean valid sectors are pushed into a small fully associative
/// FIFO instead of being dropped; a FIFO hit moves the sector back into the
/// cache. A (blk, sector) pair lives in at most one of the two structures.
class SectorCache {
 public:
  SectorCache(const CacheConfig& config, std::uint32_t partition, bool fifo_enabled);

  LookupResult lookup_sector(BlockAddr blk, unsigned sector);
  std::optional<WritebackRequest> write_sectors(BlockAddr blk, SectorMask mask, std::span<const Word> payload);
  std::optional<WritebackRequest> fill_sector(BlockAddr blk, unsigned sector, const SectorData& data, bool clean);
  /// Data of a resident, valid, clean sector. Leaves recency untouched.
  std::optional<SectorData> probe_clean_sector(BlockAddr blk, unsigned sector) const;
  std::optional<WritebackRequest> copy_into(BlockAddr blk, unsigned sector, const SectorData& data) {
    return fill_sector(blk, sector, data, true);
  }

  /// Writes back every dirty line, then invalidates the cache and the FIFO.
  std::vector<WritebackRequest> flush();

  bool resident(BlockAddr blk, unsigned sector) const;
  bool dirty(BlockAddr blk, unsigned sector) const;
  bool in_fifo(BlockAddr blk, unsigned sector) const;
  const std::deque<FifoEntry>& fifo() const { return fifo_; }
  bool fifo_enabled() const { return fifo_capacity_ > 0; }

  std::uint64_t evictions() const { return evictions_; }
  std::uint64_t fifo_insertions() const { return fifo_insertions_; }
  std::uint64_t fifo_drops() const { return fifo_drops_; }

 private:
  struct Line {
    std::uint64_t tag = 0;
    bool allocated = false;
    SectorMask valid;
    SectorMask dirty;
    std::uint64_t last_use = 0;
    LineData data{};
  };

  std::span<Line> set_of(BlockAddr blk);
  std::span<const Line> set_of(BlockAddr blk) const;
  Line* find(BlockAddr blk);
  const Line* find(BlockAddr blk) const;
  /// Returns the line holding `blk`, allocating (and evicting) if needed.
  Line& allocate(BlockAddr blk, std::optional<WritebackRequest>& writeback);
  std::optional<WritebackRequest> evict(Line& line);
  void fifo_push(BlockAddr blk, unsigned sector, const SectorData& data);
  void fifo_erase(BlockAddr blk, SectorMask sectors);

  CacheConfig config_;
  std::uint32_t partition_;
  std::uint64_t n_sets_;
  std::size_t fifo_capacity_;
  std::vector<Line> lines_;
  std::deque<FifoEntry> fifo_;
  std::uint64_t clock_ = 0;
  std::uint64_t evictions_ = 0;
  std::uint64_t fifo_insertions_ = 0;
  std::uint64_t fifo_drops_ = 0;
};

}  // namespace cmdsim

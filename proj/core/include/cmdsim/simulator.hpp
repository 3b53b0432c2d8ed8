// Trace-driven L2 + memory-controller simulation.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmdsim/config.hpp"
#include "cmdsim/controller.hpp"
#include "cmdsim/sector_cache.hpp"
#include "cmdsim/stats_report.hpp"
#include "cmdsim/trace.hpp"

namespace cmdsim {

struct WritebackEvent {
  WritebackRequest request;
  WriteOutcome outcome;
};

/// Runs accesses through the partitioned L2 and the memory controllers.
/// Partition of a block is blk mod n_partitions.
class Simulator {
 public:
  Simulator(const SimConfig& config, Mode mode, std::uint64_t n_blocks);

  void step(const TraceRecord& rec);
  /// Steps every record; a TraceViolation carries the offending index.
  void run(std::span<const TraceRecord> records);

  SectorData read(BlockAddr blk, unsigned sector);
  void write(BlockAddr blk, SectorMask mask, std::span<const Word> payload);
  /// Writes back every dirty line and leaves the L2 and FIFOs empty.
  void flush();

  /// Counter snapshot; trace digest and config echo are left to the caller.
  TrafficReport report() const;

  /// Keep every writeback handled (with its classification) and every value
  /// returned by trace reads.
  void set_recording(bool on) { recording_ = on; }
  const std::vector<WritebackEvent>& writeback_log() const { return writeback_log_; }
  const std::vector<SectorData>& read_log() const { return read_log_; }

  /// Memory-side content of a materialized sector; no side effects.
  SectorData stored_sector(BlockAddr blk, unsigned sector) const;
  void check_invariants() const;

  /// Independent cross-counters from the metadata caches themselves.
  std::uint64_t metadata_cache_misses() const;
  std::uint64_t metadata_dirty_evictions() const;

  Mode mode() const { return mode_; }
  std::uint64_t n_blocks() const { return n_blocks_; }
  const SimConfig& config() const { return config_; }
  const SectorCache& l2(std::uint32_t partition) const { return caches_.at(partition); }
  const MemoryController& controller(std::uint32_t partition) const { return controllers_.at(partition); }
  std::uint32_t partitions() const { return config_.cache.n_partitions; }

 private:
  void writeback(std::uint32_t partition, std::optional<WritebackRequest> wb);
  void check_range(BlockAddr blk) const;

  SimConfig config_;
  Mode mode_;
  std::uint64_t n_blocks_;
  std::vector<SectorCache> caches_;
  std::vector<MemoryController> controllers_;
  std::uint64_t l2_hits_ = 0;
  std::uint64_t l2_misses_ = 0;
  std::uint64_t fifo_hits_ = 0;
  bool recording_ = false;
  std::vector<WritebackEvent> writeback_log_;
  std::vector<SectorData> read_log_;
};

/// Address-space size for a run: config.n_blocks when set, otherwise the
/// trace's highest block + 1 rounded up to a whole number of partitions.
std::uint64_t resolve_n_blocks(const SimConfig& config, std::span<const TraceRecord> trace);

/// Validates, simulates and (per config) flushes; fills digest and config echo.
TrafficReport run(std::span<const TraceRecord> trace, const SimConfig& config, Mode mode);

/// Runs every mode on the same trace; the first mode is the reference for
/// reduction percentages.
Comparison compare(std::span<const TraceRecord> trace, const SimConfig& config, std::span<const Mode> modes);

}  // namespace cmdsim

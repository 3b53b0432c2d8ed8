#include "cmdsim/simulator.hpp"

#include <algorithm>

namespace cmdsim {

Simulator::Simulator(const SimConfig& config, Mode mode, std::uint64_t n_blocks)
    : config_(config), mode_(mode), n_blocks_(n_blocks) {
  config_.validate();
  if (n_blocks_ == 0 || n_blocks_ > (std::uint64_t{1} << 32)) {
    throw std::invalid_argument("Simulator: n_blocks must lie in [1, 2^32]");
  }
  const std::uint32_t parts = config_.cache.n_partitions;
  caches_.reserve(parts);
  controllers_.reserve(parts);
  for (std::uint32_t p = 0; p < parts; ++p) {
    caches_.emplace_back(config_.cache, p, mode == Mode::Cmd);
    controllers_.emplace_back(config_, mode, p, n_blocks_);
  }
}

void Simulator::check_range(BlockAddr blk) const {
  if (blk.value >= n_blocks_) {
    throw TraceViolation(std::nullopt, "block " + std::to_string(blk.value) + " outside the address space of " +
                                           std::to_string(n_blocks_) + " blocks");
  }
}

void Simulator::writeback(std::uint32_t partition, std::optional<WritebackRequest> wb) {
  if (!wb) return;
  WriteOutcome out = controllers_[partition].handle_write(*wb);
  if (recording_) writeback_log_.push_back({std::move(*wb), out});
}

SectorData Simulator::read(BlockAddr blk, unsigned sector) {
  check_range(blk);
  const std::uint32_t p = config_.cache.partition_of(blk);
  SectorCache& l2 = caches_[p];
  LookupResult hit = l2.lookup_sector(blk, sector);
  switch (hit.outcome) {
    case LookupOutcome::HitCache: ++l2_hits_; return hit.data;
    case LookupOutcome::HitFifo:
      ++fifo_hits_;
      writeback(p, std::move(hit.writeback));
      return hit.data;
    case LookupOutcome::Miss: break;
  }
  ++l2_misses_;
  ReadOutcome got = controllers_[p].handle_read(blk, sector, l2);
  // The CAR copy and the DRAM fill both install a clean sector; either may
  // evict, and the eviction is handled after the data is delivered.
  if (got.source == ReadSource::CarCopy) {
    writeback(p, l2.copy_into(blk, sector, got.data));
  } else {
    writeback(p, l2.fill_sector(blk, sector, got.data, true));
  }
  return got.data;
}

void Simulator::write(BlockAddr blk, SectorMask mask, std::span<const Word> payload) {
  check_range(blk);
  const std::uint32_t p = config_.cache.partition_of(blk);
  writeback(p, caches_[p].write_sectors(blk, mask, payload));
}

void Simulator::step(const TraceRecord& rec) {
  if (rec.is_read()) {
    SectorData d = read(rec.blk, rec.sector);
    if (recording_) read_log_.push_back(d);
  } else {
    write(rec.blk, rec.mask, rec.payload);
  }
}

void Simulator::run(std::span<const TraceRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      step(records[i]);
    } catch (const TraceViolation& e) {
      if (e.index()) throw;
      throw TraceViolation(i, e.what());
    }
  }
}

void Simulator::flush() {
  for (std::uint32_t p = 0; p < caches_.size(); ++p) {
    for (auto& wb : caches_[p].flush()) writeback(p, std::move(wb));
  }
}

TrafficReport Simulator::report() const {
  TrafficReport r;
  r.mode = mode_;
  for (const auto& mc : controllers_) {
    r.counts += mc.counts();
    r.dedup += mc.dedup_counts();
    r.events += mc.events();
  }
  r.counts.l2_hit = l2_hits_;
  r.counts.l2_miss = l2_misses_;
  r.counts.fifo_hit = fifo_hits_;
  r.finalize(config_.cost);
  return r;
}

SectorData Simulator::stored_sector(BlockAddr blk, unsigned sector) const {
  check_range(blk);
  return controllers_[config_.cache.partition_of(blk)].stored_sector(blk, sector);
}

void Simulator::check_invariants() const {
  for (const auto& mc : controllers_) mc.check_invariants();
  for (const auto& l2 : caches_) {
    for (const auto& e : l2.fifo()) {
      if (l2.resident(e.blk, e.sector)) {
        throw InvariantError("sector of block " + std::to_string(e.blk.value) + " both cached and in the FIFO");
      }
    }
  }
}

std::uint64_t Simulator::metadata_cache_misses() const {
  std::uint64_t n = 0;
  for (const auto& mc : controllers_) n += mc.metadata().total_misses();
  return n;
}

std::uint64_t Simulator::metadata_dirty_evictions() const {
  std::uint64_t n = 0;
  for (const auto& mc : controllers_) n += mc.metadata().total_dirty_evictions();
  return n;
}

std::uint64_t resolve_n_blocks(const SimConfig& config, std::span<const TraceRecord> trace) {
  auto top = max_block(trace);
  if (config.n_blocks != 0) {
    if (top && top->value >= config.n_blocks) {
      throw TraceViolation(std::nullopt, "trace references block " + std::to_string(top->value) +
                                             " beyond n_blocks " + std::to_string(config.n_blocks));
    }
    return config.n_blocks;
  }
  const std::uint64_t parts = config.cache.n_partitions;
  std::uint64_t need = top ? top->value + 1 : 1;
  return (need + parts - 1) / parts * parts;
}

TrafficReport run(std::span<const TraceRecord> trace, const SimConfig& config, Mode mode) {
  config.validate();
  TraceVerdict verdict = validate_trace(trace);
  if (!verdict.valid) throw TraceViolation(verdict.first_violation, verdict.reason);
  SimConfig resolved = config;
  resolved.n_blocks = resolve_n_blocks(config, trace);
  Simulator sim(resolved, mode, resolved.n_blocks);
  sim.run(trace);
  if (resolved.flush_at_end) sim.flush();
  TrafficReport r = sim.report();
  r.trace_digest = digest_hex(format_trace(trace));
  r.records = trace.size();
  r.config = to_json(resolved);
  return r;
}

Comparison compare(std::span<const TraceRecord> trace, const SimConfig& config, std::span<const Mode> modes) {
  Comparison c;
  for (Mode m : modes) c.reports.push_back(run(trace, config, m));
  return c;
}

}  // namespace cmdsim

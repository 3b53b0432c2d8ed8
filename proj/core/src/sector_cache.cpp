#include "cmdsim/sector_cache.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cmdsim {

void CacheConfig::validate() const {
  auto bad = [](const std::string& msg) { throw std::invalid_argument("CacheConfig: " + msg); };
  if (line_bytes != kLineBytes) bad("line_bytes must be 128");
  if (sectors_per_line != kSectorsPerLine) bad("sectors_per_line must be 4");
  if (associativity == 0) bad("associativity must be positive");
  if (n_partitions == 0) bad("n_partitions must be positive");
  std::uint64_t unit = std::uint64_t{line_bytes} * associativity * n_partitions;
  if (capacity_bytes == 0 || capacity_bytes % unit != 0) {
    bad("capacity_bytes must be a positive multiple of line_bytes * associativity * n_partitions");
  }
}

SectorCache::SectorCache(const CacheConfig& config, std::uint32_t partition, bool fifo_enabled)
    : config_(config),
      partition_(partition),
      n_sets_(config.sets_per_partition()),
      fifo_capacity_(fifo_enabled ? config.fifo_entries_per_partition : 0),
      lines_(n_sets_ * config.associativity) {
  config_.validate();
  if (partition >= config.n_partitions) throw std::invalid_argument("SectorCache: partition out of range");
}

std::span<SectorCache::Line> SectorCache::set_of(BlockAddr blk) {
  std::uint64_t set = (blk.value / config_.n_partitions) % n_sets_;
  return std::span<Line>(lines_).subspan(set * config_.associativity, config_.associativity);
}

std::span<const SectorCache::Line> SectorCache::set_of(BlockAddr blk) const {
  std::uint64_t set = (blk.value / config_.n_partitions) % n_sets_;
  return std::span<const Line>(lines_).subspan(set * config_.associativity, config_.associativity);
}

SectorCache::Line* SectorCache::find(BlockAddr blk) {
  for (Line& l : set_of(blk)) {
    if (l.allocated && l.tag == blk.value) return &l;
  }
  return nullptr;
}

const SectorCache::Line* SectorCache::find(BlockAddr blk) const {
  for (const Line& l : set_of(blk)) {
    if (l.allocated && l.tag == blk.value) return &l;
  }
  return nullptr;
}

std::optional<WritebackRequest> SectorCache::evict(Line& line) {
  ++evictions_;
  BlockAddr blk{line.tag};
  std::optional<WritebackRequest> wb;
  if (!line.dirty.empty()) {
    WritebackRequest req{blk, line.dirty, {}};
    req.payload.reserve(line.dirty.count() * kWordsPerSector);
    for (unsigned s = 0; s < kSectorsPerLine; ++s) {
      if (!line.dirty.test(s)) continue;
      auto first = line.data.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector);
      req.payload.insert(req.payload.end(), first, first + kWordsPerSector);
    }
    wb = std::move(req);
  }
  if (fifo_capacity_ > 0) {
    SectorMask clean = line.valid & ~line.dirty;
    for (unsigned s = 0; s < kSectorsPerLine; ++s) {
      if (!clean.test(s)) continue;
      SectorData d;
      std::copy_n(line.data.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector), kWordsPerSector, d.begin());
      fifo_push(blk, s, d);
    }
  }
  line = Line{};
  return wb;
}

SectorCache::Line& SectorCache::allocate(BlockAddr blk, std::optional<WritebackRequest>& writeback) {
  if (Line* hit = find(blk)) return *hit;
  auto set = set_of(blk);
  Line* victim = nullptr;
  for (Line& l : set) {
    if (!l.allocated) {
      victim = &l;
      break;
    }
    if (!victim || l.last_use < victim->last_use) victim = &l;
  }
  if (victim->allocated) writeback = evict(*victim);
  victim->allocated = true;
  victim->tag = blk.value;
  victim->last_use = ++clock_;
  return *victim;
}

void SectorCache::fifo_push(BlockAddr blk, unsigned sector, const SectorData& data) {
  if (fifo_.size() == fifo_capacity_) {
    fifo_.pop_front();
    ++fifo_drops_;
  }
  fifo_.push_back({blk, static_cast<std::uint8_t>(sector), data});
  ++fifo_insertions_;
}

void SectorCache::fifo_erase(BlockAddr blk, SectorMask sectors) {
  if (fifo_.empty()) return;
  std::erase_if(fifo_, [&](const FifoEntry& e) { return e.blk == blk && sectors.test(e.sector); });
}

LookupResult SectorCache::lookup_sector(BlockAddr blk, unsigned sector) {
  LookupResult r;
  if (Line* l = find(blk); l && l->valid.test(sector)) {
    l->last_use = ++clock_;
    r.outcome = LookupOutcome::HitCache;
    std::copy_n(l->data.begin() + static_cast<std::ptrdiff_t>(sector * kWordsPerSector), kWordsPerSector,
                r.data.begin());
    return r;
  }
  auto it = std::find_if(fifo_.begin(), fifo_.end(),
                         [&](const FifoEntry& e) { return e.blk == blk && e.sector == sector; });
  if (it == fifo_.end()) return r;
  r.outcome = LookupOutcome::HitFifo;
  r.data = it->data;
  fifo_.erase(it);
  r.writeback = fill_sector(blk, sector, r.data, true);
  return r;
}

std::optional<WritebackRequest> SectorCache::write_sectors(BlockAddr blk, SectorMask mask,
                                                           std::span<const Word> payload) {
  if (payload.size() != mask.count() * kWordsPerSector) {
    throw std::invalid_argument("write_sectors: payload does not match mask");
  }
  std::optional<WritebackRequest> wb;
  fifo_erase(blk, mask);
  Line& line = allocate(blk, wb);
  std::size_t slot = 0;
  for (unsigned s = 0; s < kSectorsPerLine; ++s) {
    if (!mask.test(s)) continue;
    std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(slot * kWordsPerSector), kWordsPerSector,
                line.data.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector));
    ++slot;
  }
  line.valid = line.valid | mask;
  line.dirty = line.dirty | mask;
  line.last_use = ++clock_;
  return wb;
}

std::optional<WritebackRequest> SectorCache::fill_sector(BlockAddr blk, unsigned sector, const SectorData& data,
                                                         bool clean) {
  std::optional<WritebackRequest> wb;
  fifo_erase(blk, SectorMask::single(sector));
  Line& line = allocate(blk, wb);
  std::copy(data.begin(), data.end(), line.data.begin() + static_cast<std::ptrdiff_t>(sector * kWordsPerSector));
  line.valid.set(sector);
  if (clean) {
    line.dirty = line.dirty & ~SectorMask::single(sector);
  } else {
    line.dirty.set(sector);
  }
  line.last_use = ++clock_;
  return wb;
}

std::optional<SectorData> SectorCache::probe_clean_sector(BlockAddr blk, unsigned sector) const {
  const Line* l = find(blk);
  if (!l || !l->valid.test(sector) || l->dirty.test(sector)) return std::nullopt;
  SectorData d;
  std::copy_n(l->data.begin() + static_cast<std::ptrdiff_t>(sector * kWordsPerSector), kWordsPerSector, d.begin());
  return d;
}

std::vector<WritebackRequest> SectorCache::flush() {
  std::vector<WritebackRequest> out;
  // Oldest lines first so the writeback order does not depend on way layout.
  std::vector<Line*> order;
  for (Line& l : lines_) {
    if (l.allocated) order.push_back(&l);
  }
  std::sort(order.begin(), order.end(), [](const Line* a, const Line* b) { return a->last_use < b->last_use; });
  for (Line* l : order) {
    if (!l->dirty.empty()) {
      WritebackRequest req{BlockAddr{l->tag}, l->dirty, {}};
      for (unsigned s = 0; s < kSectorsPerLine; ++s) {
        if (!l->dirty.test(s)) continue;
        auto first = l->data.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector);
        req.payload.insert(req.payload.end(), first, first + kWordsPerSector);
      }
      out.push_back(std::move(req));
    }
    *l = Line{};
  }
  fifo_.clear();
  return out;
}

bool SectorCache::resident(BlockAddr blk, unsigned sector) const {
  const Line* l = find(blk);
  return l && l->valid.test(sector);
}

bool SectorCache::dirty(BlockAddr blk, unsigned sector) const {
  const Line* l = find(blk);
  return l && l->dirty.test(sector);
}

bool SectorCache::in_fifo(BlockAddr blk, unsigned sector) const {
  return std::any_of(fifo_.begin(), fifo_.end(),
                     [&](const FifoEntry& e) { return e.blk == blk && e.sector == sector; });
}

}  // namespace cmdsim

#include "cmdsim/metadata_store.hpp"

#include <algorithm>

namespace cmdsim {

const char* to_string(TypeFlag flag) {
  switch (flag) {
    case TypeFlag::ReadOnly: return "00";
    case TypeFlag::Intra: return "01";
    case TypeFlag::Inter: return "10";
    case TypeFlag::Reference: return "11";
  }
  return "??";
}

void MetadataCacheConfig::validate() const {
  if (line_bytes == 0 || line_bytes % 4 != 0) {
    throw std::invalid_argument("MetadataCacheConfig: line_bytes must be a positive multiple of 4");
  }
}

std::uint32_t entries_per_line(MetaKind kind, std::uint32_t line_bytes) {
  switch (kind) {
    case MetaKind::Addr: return line_bytes / 4;  // 4B mapping entries
    case MetaKind::Type: return line_bytes * 4;  // 2-bit flags
    case MetaKind::Mask: return line_bytes * 2;  // 4-bit masks
  }
  return 1;
}

MetadataCache::MetadataCache(std::uint64_t budget_bytes, std::uint32_t line_bytes)
    : capacity_(budget_bytes == 0 ? 0 : std::max<std::uint64_t>(1, budget_bytes / line_bytes)) {}

MetadataCache::Access MetadataCache::access(std::uint64_t line, bool write) {
  Access a;
  if (auto it = index_.find(line); it != index_.end()) {
    a.hit = true;
    ++hits_;
    it->second->dirty |= write;
    lru_.splice(lru_.begin(), lru_, it->second);
    return a;
  }
  ++misses_;
  if (capacity_ != 0 && index_.size() == capacity_) {
    const Slot& victim = lru_.back();
    if (victim.dirty) {
      a.dirty_eviction = true;
      ++dirty_evictions_;
    }
    index_.erase(victim.line);
    lru_.pop_back();
  }
  lru_.push_front({line, write});
  index_.emplace(line, lru_.begin());
  return a;
}

BlockMetadata::BlockMetadata(const MetadataCacheConfig& config, std::uint32_t partition,
                             std::uint32_t n_partitions, std::uint64_t n_blocks)
    : config_(config), partition_(partition), n_partitions_(n_partitions) {
  config_.validate();
  std::uint64_t local_blocks = n_blocks > partition ? (n_blocks - partition + n_partitions - 1) / n_partitions : 0;
  table_.resize(local_blocks);
  caches_.emplace_back(config.addr_cache, config.line_bytes);
  caches_.emplace_back(config.type_cache, config.line_bytes);
  caches_.emplace_back(config.mask_cache, config.line_bytes);
}

std::uint64_t BlockMetadata::local(BlockAddr blk) const {
  if (blk.value % n_partitions_ != partition_) {
    throw InvariantError("metadata access for block " + std::to_string(blk.value) + " in the wrong partition");
  }
  return blk.value / n_partitions_;
}

MetaTraffic BlockMetadata::touch(MetaKind kind, BlockAddr blk, bool write) {
  std::uint64_t line = local(blk) / entries_per_line(kind, config_.line_bytes);
  auto a = caches_[static_cast<std::size_t>(kind)].access(line, write);
  MetaTraffic t;
  t.hit = a.hit;
  t.dram_reads = a.hit ? 0 : 1;
  t.dram_writes = a.dirty_eviction ? 1 : 0;
  return t;
}

BlockMetadata::Read BlockMetadata::meta_read(MetaKind kind, BlockAddr blk) {
  MetaTraffic t = touch(kind, blk, false);
  const BlockMeta& m = table_.at(local(blk));
  std::uint32_t v = 0;
  switch (kind) {
    case MetaKind::Addr: v = m.mapping; break;
    case MetaKind::Type: v = static_cast<std::uint32_t>(m.flag); break;
    case MetaKind::Mask: v = m.mask.bits(); break;
  }
  return {v, t};
}

MetaTraffic BlockMetadata::meta_write(MetaKind kind, BlockAddr blk, std::uint32_t value) {
  switch (kind) {
    case MetaKind::Type:
      if (value > 3) throw std::invalid_argument("type flag wider than 2 bits");
      break;
    case MetaKind::Mask:
      if (value > 0xF) throw std::invalid_argument("sector mask wider than 4 bits");
      break;
    case MetaKind::Addr: break;
  }
  MetaTraffic t = touch(kind, blk, true);
  BlockMeta& m = table_.at(local(blk));
  switch (kind) {
    case MetaKind::Addr: m.mapping = value; break;
    case MetaKind::Type: m.flag = static_cast<TypeFlag>(value); break;
    case MetaKind::Mask: m.mask = SectorMask::from_bits(static_cast<std::uint8_t>(value)); break;
  }
  return t;
}

std::uint64_t BlockMetadata::total_hits() const {
  std::uint64_t n = 0;
  for (const auto& c : caches_) n += c.hits();
  return n;
}

std::uint64_t BlockMetadata::total_misses() const {
  std::uint64_t n = 0;
  for (const auto& c : caches_) n += c.misses();
  return n;
}

std::uint64_t BlockMetadata::total_dirty_evictions() const {
  std::uint64_t n = 0;
  for (const auto& c : caches_) n += c.dirty_evictions();
  return n;
}

FrameTable::FrameTable(std::uint32_t partition, std::uint32_t n_partitions, std::uint64_t n_blocks)
    : partition_(partition), n_partitions_(n_partitions) {
  std::uint64_t local_frames = n_blocks > partition ? (n_blocks - partition + n_partitions - 1) / n_partitions : 0;
  frames_.resize(local_frames);
}

bool FrameTable::owns(FrameAddr frame) const {
  return frame.value % n_partitions_ == partition_ && frame.value / n_partitions_ < frames_.size();
}

const FrameTable::Info& FrameTable::info(FrameAddr frame) const {
  if (!owns(frame)) throw InvariantError("frame " + std::to_string(frame.value) + " not owned by this partition");
  return frames_[frame.value / n_partitions_];
}

FrameTable::Info& FrameTable::info(FrameAddr frame) {
  if (!owns(frame)) throw InvariantError("frame " + std::to_string(frame.value) + " not owned by this partition");
  return frames_[frame.value / n_partitions_];
}

FrameAddr FrameTable::alloc(BlockAddr requester) {
  FrameAddr home{requester.value};
  if (free_.contains(home.value)) {
    free_.erase(home.value);
    return home;
  }
  if (free_.empty()) throw InvariantError("frame pool exhausted");
  FrameAddr f{*free_.begin()};
  free_.erase(free_.begin());
  return f;
}

void FrameTable::claim(FrameAddr frame) {
  if (free_.erase(frame.value) == 0) {
    throw InvariantError("claim of non-free frame " + std::to_string(frame.value));
  }
}

void FrameTable::release(FrameAddr frame) {
  const Info& i = info(frame);
  if (i.refcount != 0 || i.home_in_use) {
    throw InvariantError("release of live frame " + std::to_string(frame.value));
  }
  if (!free_.insert(frame.value).second) {
    throw InvariantError("double release of frame " + std::to_string(frame.value));
  }
}

void FrameTable::add_ref(FrameAddr frame) {
  if (free_.contains(frame.value)) throw InvariantError("reference to free frame " + std::to_string(frame.value));
  ++info(frame).refcount;
}

std::uint64_t FrameTable::drop_ref(FrameAddr frame) {
  Info& i = info(frame);
  if (i.refcount == 0) throw InvariantError("decrement of untracked frame " + std::to_string(frame.value));
  return --i.refcount;
}

void FrameTable::clear_home(BlockAddr blk) {
  Info& i = info(FrameAddr{blk.value});
  if (!i.home_in_use) throw InvariantError("home of block " + std::to_string(blk.value) + " already vacated");
  i.home_in_use = false;
}

}  // namespace cmdsim

#include "cmdsim/controller.hpp"

#include <algorithm>
#include <map>

namespace cmdsim {

const char* to_string(WriteClass cls) {
  switch (cls) {
    case WriteClass::Direct: return "direct";
    case WriteClass::Intra: return "intra";
    case WriteClass::Inter: return "inter";
    case WriteClass::Unique: return "unique";
  }
  return "?";
}

TraceViolation::TraceViolation(std::optional<std::size_t> index, const std::string& what)
    : std::runtime_error(index ? "record " + std::to_string(*index + 1) + ": " + what : what), index_(index) {}

MemoryController::MemoryController(const SimConfig& config, Mode mode, std::uint32_t partition,
                                   std::uint64_t n_blocks)
    : mode_(mode),
      partition_(partition),
      n_partitions_(config.cache.n_partitions),
      n_blocks_(n_blocks),
      seed_(config.seed),
      meta_(config.metadata, partition, config.cache.n_partitions, n_blocks),
      frames_(partition, config.cache.n_partitions, n_blocks),
      store_(config.hash_entries) {}

void MemoryController::check_block(BlockAddr blk) const {
  if (blk.value >= n_blocks_) {
    throw TraceViolation(std::nullopt, "block " + std::to_string(blk.value) + " outside the address space");
  }
  if (blk.value % n_partitions_ != partition_) {
    throw InvariantError("block " + std::to_string(blk.value) + " routed to the wrong partition");
  }
}

void MemoryController::account(const MetaTraffic& t) {
  counts_.metadata_read += t.dram_reads;
  counts_.metadata_write += t.dram_writes;
  events_.metadata_hit += t.hit ? 1 : 0;
}

std::uint32_t MemoryController::meta_read(MetaKind kind, BlockAddr blk) {
  auto r = meta_.meta_read(kind, blk);
  account(r.traffic);
  return r.value;
}

void MemoryController::meta_write(MetaKind kind, BlockAddr blk, std::uint32_t value) {
  account(meta_.meta_write(kind, blk, value));
}

SectorData MemoryController::frame_sector(FrameAddr frame, unsigned sector) const {
  auto it = dram_.find(frame.value);
  if (it == dram_.end()) throw InvariantError("read of unwritten frame " + std::to_string(frame.value));
  SectorData d;
  std::copy_n(it->second.begin() + static_cast<std::ptrdiff_t>(sector * kWordsPerSector), kWordsPerSector,
              d.begin());
  return d;
}

void MemoryController::map(BlockAddr blk, FrameAddr frame) { aliases_[frame.value].insert(blk.value); }

void MemoryController::unmap(BlockAddr blk, FrameAddr frame) {
  auto it = aliases_.find(frame.value);
  if (it == aliases_.end() || it->second.erase(blk.value) == 0) {
    throw InvariantError("block " + std::to_string(blk.value) + " not mapped to frame " +
                         std::to_string(frame.value));
  }
  if (it->second.empty()) aliases_.erase(it);
}

const std::set<std::uint64_t>* MemoryController::aliases(FrameAddr frame) const {
  auto it = aliases_.find(frame.value);
  return it == aliases_.end() ? nullptr : &it->second;
}

WriteOutcome MemoryController::write_direct(const WritebackRequest& wb) {
  auto [it, fresh] = dram_.try_emplace(wb.blk.value);
  if (fresh) {
    for (unsigned w = 0; w < kWordsPerLine; ++w) it->second[w] = bg_word(seed_, wb.blk, w);
  }
  std::size_t slot = 0;
  for (unsigned s = 0; s < kSectorsPerLine; ++s) {
    if (!wb.mask.test(s)) continue;
    std::copy_n(wb.payload.begin() + static_cast<std::ptrdiff_t>(slot * kWordsPerSector), kWordsPerSector,
                it->second.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector));
    ++slot;
  }
  SectorMask& written = baseline_written_[wb.blk.value];
  written = written | wb.mask;
  ++counts_.write;
  events_.write_bytes += wb.mask.count() * kSectorBytes;
  return {WriteClass::Direct, FrameAddr{wb.blk.value}, false, written};
}

WriteOutcome MemoryController::handle_write(const WritebackRequest& wb) {
  check_block(wb.blk);
  if (wb.mask.empty() || wb.payload.size() != wb.mask.count() * kWordsPerSector) {
    throw std::invalid_argument("malformed writeback for block " + std::to_string(wb.blk.value));
  }
  ++dedup_.writebacks;
  if (mode_ == Mode::Baseline) return write_direct(wb);

  const BlockAddr blk = wb.blk;
  const auto flag = static_cast<TypeFlag>(meta_read(MetaKind::Type, blk));
  const auto old_mask = SectorMask::from_bits(static_cast<std::uint8_t>(meta_read(MetaKind::Mask, blk)));
  const std::uint32_t mapping = flag == TypeFlag::ReadOnly ? 0 : meta_read(MetaKind::Addr, blk);

  WriteOutcome out;
  CanonicalBlock block;
  if (coverage_check(wb.mask, old_mask) == Coverage::NeedsMerge) {
    CanonicalBlock old;
    if (flag == TypeFlag::Intra) {
      old = {old_mask, std::vector<Word>(old_mask.count() * kWordsPerSector, mapping)};
    } else {
      old = CanonicalBlock::from_line(old_mask, dram_.at(mapping));
      ++counts_.dedup_read;
      out.merge_read = true;
    }
    block = merge(old, wb.mask, wb.payload);
  } else {
    block = {wb.mask, wb.payload};
  }

  // Drop the block's old association before classifying the new content.
  std::optional<FrameAddr> reusable;
  switch (flag) {
    case TypeFlag::ReadOnly: {
      FrameAddr home{blk.value};
      frames_.clear_home(blk);
      if (frames_.refcount(home) == 0) frames_.release(home);
      break;
    }
    case TypeFlag::Intra: break;
    case TypeFlag::Inter: {
      FrameAddr f{mapping};
      unmap(blk, f);
      dedup_decrement(store_, frames_, f);
      break;
    }
    case TypeFlag::Reference: {
      // A shared reference keeps its frame for the surviving duplicates and
      // the new data is relocated; a sole owner may reuse its frame.
      FrameAddr f{mapping};
      bool shared = frames_.refcount(f) > 1;
      unmap(blk, f);
      dedup_decrement(store_, frames_, f);
      if (!shared) reusable = f;
      break;
    }
  }

  TypeFlag new_flag;
  std::uint32_t new_mapping;
  if (auto word = detect_intra(block)) {
    new_flag = TypeFlag::Intra;
    new_mapping = *word;
    out.cls = WriteClass::Intra;
    ++dedup_.intra_removed;
  } else {
    ++events_.fingerprints;
    Fingerprint fp = fingerprint(block);
    DedupLookup hit = store_.lookup(fp);
    if (hit.duplicate) {
      frames_.add_ref(hit.ref_frame);
      map(blk, hit.ref_frame);
      new_flag = TypeFlag::Inter;
      new_mapping = static_cast<std::uint32_t>(hit.ref_frame.value);
      out.cls = WriteClass::Inter;
      out.frame = hit.ref_frame;
      ++dedup_.inter_removed;
    } else {
      FrameAddr f;
      if (reusable && frames_.is_free(*reusable)) {
        frames_.claim(*reusable);
        f = *reusable;
      } else {
        f = frames_.alloc(blk);
      }
      frames_.add_ref(f);
      map(blk, f);
      dram_[f.value] = block.to_line();
      ++counts_.write;
      events_.write_bytes += block.mask.count() * kSectorBytes;
      ++dedup_.unique_writes;
      store_.insert(fp, f);
      new_flag = TypeFlag::Reference;
      new_mapping = static_cast<std::uint32_t>(f.value);
      out.cls = WriteClass::Unique;
      out.frame = f;
    }
  }

  if (new_flag != flag) meta_write(MetaKind::Type, blk, static_cast<std::uint32_t>(new_flag));
  if (block.mask != old_mask) meta_write(MetaKind::Mask, blk, block.mask.bits());
  if (flag == TypeFlag::ReadOnly || new_mapping != mapping) meta_write(MetaKind::Addr, blk, new_mapping);
  out.stored_mask = block.mask;
  return out;
}

ReadOutcome MemoryController::read_direct(BlockAddr blk, unsigned sector) {
  ReadOutcome out;
  auto it = dram_.find(blk.value);
  if (it == dram_.end()) {
    ++counts_.read_only;
    out.dram_class = RequestClass::ReadOnly;
    out.data = bg_sector(seed_, blk, sector);
    return out;
  }
  ++counts_.data_read;
  out.dram_class = RequestClass::DataRead;
  std::copy_n(it->second.begin() + static_cast<std::ptrdiff_t>(sector * kWordsPerSector), kWordsPerSector,
              out.data.begin());
  return out;
}

ReadOutcome MemoryController::handle_read(BlockAddr blk, unsigned sector, const SectorCache& l2) {
  check_block(blk);
  if (sector >= kSectorsPerLine) throw std::invalid_argument("sector out of range");
  if (mode_ == Mode::Baseline) return read_direct(blk, sector);

  ReadOutcome out;
  const auto flag = static_cast<TypeFlag>(meta_read(MetaKind::Type, blk));
  if (flag == TypeFlag::ReadOnly) {
    ++counts_.read_only;
    out.dram_class = RequestClass::ReadOnly;
    out.data = bg_sector(seed_, blk, sector);
    return out;
  }

  const std::uint32_t mapping = meta_read(MetaKind::Addr, blk);
  if (!meta_.peek(blk).mask.test(sector)) {
    throw TraceViolation(std::nullopt, "read of unmaterialized sector " + std::to_string(sector) + " of block " +
                                           std::to_string(blk.value));
  }

  if (flag == TypeFlag::Intra) {
    out.source = ReadSource::IntraMapping;
    out.data.fill(mapping);
    return out;
  }

  FrameAddr frame{mapping};
  if (flag == TypeFlag::Inter && (mode_ == Mode::DedupCar || mode_ == Mode::Cmd)) {
    if (const auto* peers = aliases(frame)) {
      for (std::uint64_t peer : *peers) {
        if (peer == blk.value) continue;
        if (auto d = l2.probe_clean_sector(BlockAddr{peer}, sector)) {
          if (*d != frame_sector(frame, sector)) {
            throw InvariantError("clean L2 copy of block " + std::to_string(peer) + " diverges from frame " +
                                 std::to_string(frame.value));
          }
          ++counts_.car_copy;
          out.source = ReadSource::CarCopy;
          out.data = *d;
          return out;
        }
      }
    }
  }
  ++counts_.data_read;
  out.dram_class = RequestClass::DataRead;
  out.data = frame_sector(frame, sector);
  return out;
}

SectorData MemoryController::stored_sector(BlockAddr blk, unsigned sector) const {
  if (mode_ == Mode::Baseline) {
    auto it = dram_.find(blk.value);
    if (it == dram_.end()) return bg_sector(seed_, blk, sector);
    SectorData d;
    std::copy_n(it->second.begin() + static_cast<std::ptrdiff_t>(sector * kWordsPerSector), kWordsPerSector,
                d.begin());
    return d;
  }
  const BlockMeta& m = meta_.peek(blk);
  switch (m.flag) {
    case TypeFlag::ReadOnly: return bg_sector(seed_, blk, sector);
    case TypeFlag::Intra: {
      SectorData d;
      d.fill(m.mapping);
      return d;
    }
    case TypeFlag::Inter:
    case TypeFlag::Reference: return frame_sector(FrameAddr{m.mapping}, sector);
  }
  return {};
}

void MemoryController::check_invariants() const {
  if (mode_ == Mode::Baseline) return;
  auto fail = [](const std::string& what) { throw InvariantError(what); };

  std::map<std::uint64_t, std::uint64_t> mapped;  // frame -> blocks
  std::map<std::uint64_t, SectorMask> frame_mask;
  for (std::uint64_t local = 0; local < meta_.local_blocks(); ++local) {
    BlockAddr blk{local * n_partitions_ + partition_};
    const BlockMeta& m = meta_.peek(blk);
    bool home_live = frames_.home_in_use(FrameAddr{blk.value});
    if ((m.flag == TypeFlag::ReadOnly) != home_live) {
      fail("home_in_use of frame " + std::to_string(blk.value) + " disagrees with its block's type flag");
    }
    if ((m.flag == TypeFlag::ReadOnly) != m.mask.empty()) {
      fail("block " + std::to_string(blk.value) + " mask inconsistent with its type flag");
    }
    if (m.flag == TypeFlag::Inter || m.flag == TypeFlag::Reference) {
      FrameAddr f{m.mapping};
      if (!frames_.owns(f) || frames_.is_free(f)) fail("block " + std::to_string(blk.value) + " maps to a dead frame");
      ++mapped[f.value];
      auto [it, fresh] = frame_mask.try_emplace(f.value, m.mask);
      if (!fresh && it->second != m.mask) fail("blocks sharing frame " + std::to_string(f.value) + " differ in mask");
      const auto* peers = aliases(f);
      if (!peers || !peers->contains(blk.value)) fail("alias index misses block " + std::to_string(blk.value));
    }
  }
  for (std::uint64_t local = 0; local < frames_.frame_count(); ++local) {
    FrameAddr f{local * n_partitions_ + partition_};
    std::uint64_t want = mapped.contains(f.value) ? mapped[f.value] : 0;
    if (frames_.refcount(f) != want) {
      fail("frame " + std::to_string(f.value) + " refcount " + std::to_string(frames_.refcount(f)) + " but " +
           std::to_string(want) + " blocks map to it");
    }
    bool should_be_free = want == 0 && !frames_.home_in_use(f);
    if (frames_.is_free(f) != should_be_free) fail("free pool disagrees for frame " + std::to_string(f.value));
    const auto* peers = aliases(f);
    if ((peers ? peers->size() : 0) != want) fail("alias index size wrong for frame " + std::to_string(f.value));
  }
  for (const HashEntry& e : store_.entries_lru_first()) {
    if (frames_.refcount(e.ref_frame) != e.count) {
      fail("hash entry count differs from refcount of frame " + std::to_string(e.ref_frame.value));
    }
    CanonicalBlock content = CanonicalBlock::from_line(frame_mask.at(e.ref_frame.value), dram_.at(e.ref_frame.value));
    if (fingerprint(content) != e.digest) {
      fail("hash entry digest does not match frame " + std::to_string(e.ref_frame.value));
    }
  }
}

}  // namespace cmdsim

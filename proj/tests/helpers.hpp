// Payload and trace builders shared by the unit tests.
#pragma once

#include <cstdint>
#include <vector>

#include "cmdsim/config.hpp"
#include "cmdsim/trace.hpp"

namespace cmdsim::test {

inline std::vector<Word> uniform_payload(SectorMask mask, Word w) {
  return std::vector<Word>(mask.count() * kWordsPerSector, w);
}

/// Non-uniform payload whose words are base, base+1, ...
inline std::vector<Word> ramp_payload(SectorMask mask, Word base) {
  std::vector<Word> p(mask.count() * kWordsPerSector);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = base + static_cast<Word>(i);
  return p;
}

inline SectorMask mask(const char* text) { return *SectorMask::parse(text); }

inline TraceRecord W(std::uint64_t blk, const char* m, std::vector<Word> payload) {
  return TraceRecord::write(BlockAddr{blk}, mask(m), std::move(payload));
}

inline TraceRecord R(std::uint64_t blk, unsigned sector) { return TraceRecord::read(BlockAddr{blk}, sector); }

/// One partition, one 4-way set of 128B lines, no flush at end.
inline SimConfig tiny_config(std::uint32_t fifo = 16) {
  SimConfig c;
  c.cache.capacity_bytes = 4 * 128;
  c.cache.associativity = 4;
  c.cache.n_partitions = 1;
  c.cache.fifo_entries_per_partition = fifo;
  c.hash_entries = 0;
  c.metadata.addr_cache = c.metadata.type_cache = c.metadata.mask_cache = 0;
  c.flush_at_end = false;
  return c;
}

}  // namespace cmdsim::test

// Write deduplication: canonical blocks, sector coverage, intra detection,
// strong fingerprints and the bounded reference-counted hash store.
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmdsim/metadata_store.hpp"
#include "cmdsim/trace.hpp"

namespace cmdsim {

/// The materialized sectors of a block: 8 words per mask bit, ascending by
/// sector then word offset.
struct CanonicalBlock {
  SectorMask mask;
  std::vector<Word> words;

  static CanonicalBlock from_line(SectorMask mask, const LineData& line);
  /// Spreads the words back to their sector positions; other sectors are zero.
  LineData to_line() const;
  SectorData sector(unsigned s) const { return payload_sector(mask, words, s); }
  friend bool operator==(const CanonicalBlock&, const CanonicalBlock&) = default;
};

enum class Coverage : std::uint8_t { Covered, NeedsMerge };

/// Covered iff the new write touches every sector the block already holds,
/// in which case the old data need not be read.
constexpr Coverage coverage_check(SectorMask new_mask, SectorMask old_mask) {
  return new_mask.covers(old_mask) ? Coverage::Covered : Coverage::NeedsMerge;
}

/// Overlays `new_payload` on `old`; the result mask is old | new.
CanonicalBlock merge(const CanonicalBlock& old, SectorMask new_mask, std::span<const Word> new_payload);

/// The repeated word when every valid word of `block` is identical.
std::optional<Word> detect_intra(const CanonicalBlock& block);

struct Fingerprint {
  std::array<std::uint8_t, 16> digest{};
  friend constexpr auto operator<=>(const Fingerprint&, const Fingerprint&) = default;
  std::string hex() const;
};

/// 128-bit BLAKE2b over the mask byte followed by the little-endian words.
/// Treated as collision free.
Fingerprint fingerprint(const CanonicalBlock& block);

/// BLAKE2b-128 of arbitrary bytes, lowercase hex.
std::string digest_hex(std::string_view bytes);

inline constexpr std::uint16_t kMaxDupCount = 0xFFFF;
/// Bytes per hash-store entry: 16B digest, 4B ref_addr, 2B count.
inline constexpr std::uint64_t kHashEntryBytes = 22;
/// 48 KiB per memory controller.
inline constexpr std::uint64_t kDefaultHashEntries = (48 * 1024) / kHashEntryBytes;

struct HashEntry {
  Fingerprint digest;
  FrameAddr ref_frame;
  std::uint16_t count = 1;
};

struct DedupLookup {
  bool duplicate = false;
  FrameAddr ref_frame;
  bool saturated = false;
};

enum class InsertResult : std::uint8_t { Inserted, Rejected };

/// Bounded fingerprint store with LRU recency. When full, only the least
/// recently used entry whose count is 1 may be evicted; if there is none the
/// insert is rejected.
class HashStore {
 public:
  /// capacity == 0 means unbounded.
  explicit HashStore(std::size_t capacity = kDefaultHashEntries) : capacity_(capacity) {}

  /// Duplicate iff the digest is present, not saturated and not mapped to
  /// `self_frame`. A duplicate hit bumps the count and refreshes recency.
  DedupLookup lookup(const Fingerprint& digest, std::optional<FrameAddr> self_frame = std::nullopt);
  InsertResult insert(const Fingerprint& digest, FrameAddr ref_frame);

  /// Decrements the entry for `frame`, erasing it at zero. Returns the
  /// remaining count, or nullopt when no entry refers to the frame.
  std::optional<std::uint16_t> decrement_frame(FrameAddr frame);

  const HashEntry* find(const Fingerprint& digest) const;
  const HashEntry* find_by_frame(FrameAddr frame) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t evictions() const { return evictions_; }
  std::uint64_t rejections() const { return rejections_; }

  /// Entries in LRU-first order (for inspection and tests).
  std::vector<HashEntry> entries_lru_first() const;

 private:
  struct Slot {
    HashEntry entry;
    std::uint64_t stamp;
  };
  void touch(Slot& slot);
  void set_count(Slot& slot, std::uint16_t count);

  std::size_t capacity_;
  std::uint64_t clock_ = 0;
  std::map<Fingerprint, Slot> entries_;
  std::unordered_map<FrameAddr, Fingerprint> by_frame_;
  std::set<std::pair<std::uint64_t, Fingerprint>> recency_;       // all entries
  std::set<std::pair<std::uint64_t, Fingerprint>> evictable_;     // count == 1
  std::uint64_t evictions_ = 0;
  std::uint64_t rejections_ = 0;
};

/// Drops one reference to `ref_frame` in both the frame table and the hash
/// store; at zero the entry disappears and the frame is freed when its home
/// block no longer keeps data there. Returns the remaining frame refcount.
std::uint64_t dedup_decrement(HashStore& store, FrameTable& frames, FrameAddr ref_frame);

}  // namespace cmdsim

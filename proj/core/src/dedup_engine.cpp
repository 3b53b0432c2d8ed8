#include "cmdsim/dedup_engine.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

namespace cmdsim {

namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialization failed");
}

constexpr char kHex[] = "0123456789abcdef";

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& bytes) {
  std::string s;
  s.reserve(N * 2);
  for (auto b : bytes) {
    s += kHex[b >> 4];
    s += kHex[b & 0xF];
  }
  return s;
}

}  // namespace

CanonicalBlock CanonicalBlock::from_line(SectorMask mask, const LineData& line) {
  CanonicalBlock b{mask, {}};
  b.words.reserve(mask.count() * kWordsPerSector);
  for (unsigned s = 0; s < kSectorsPerLine; ++s) {
    if (!mask.test(s)) continue;
    auto first = line.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector);
    b.words.insert(b.words.end(), first, first + kWordsPerSector);
  }
  return b;
}

LineData CanonicalBlock::to_line() const {
  LineData line{};
  std::size_t slot = 0;
  for (unsigned s = 0; s < kSectorsPerLine; ++s) {
    if (!mask.test(s)) continue;
    std::copy_n(words.begin() + static_cast<std::ptrdiff_t>(slot * kWordsPerSector), kWordsPerSector,
                line.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector));
    ++slot;
  }
  return line;
}

CanonicalBlock merge(const CanonicalBlock& old, SectorMask new_mask, std::span<const Word> new_payload) {
  if (new_payload.size() != new_mask.count() * kWordsPerSector) {
    throw std::invalid_argument("merge: payload does not match mask");
  }
  CanonicalBlock out{old.mask | new_mask, {}};
  out.words.reserve(out.mask.count() * kWordsPerSector);
  std::size_t old_slot = 0;
  std::size_t new_slot = 0;
  for (unsigned s = 0; s < kSectorsPerLine; ++s) {
    const Word* src = nullptr;
    if (new_mask.test(s)) {
      src = new_payload.data() + new_slot * kWordsPerSector;
    } else if (old.mask.test(s)) {
      src = old.words.data() + old_slot * kWordsPerSector;
    }
    if (src) out.words.insert(out.words.end(), src, src + kWordsPerSector);
    new_slot += new_mask.test(s);
    old_slot += old.mask.test(s);
  }
  return out;
}

std::optional<Word> detect_intra(const CanonicalBlock& block) {
  if (block.words.empty()) return std::nullopt;
  Word first = block.words.front();
  for (Word w : block.words) {
    if (w != first) return std::nullopt;
  }
  return first;
}

std::string Fingerprint::hex() const { return to_hex(digest); }

Fingerprint fingerprint(const CanonicalBlock& block) {
  ensure_sodium();
  std::array<std::uint8_t, 1 + kWordsPerLine * 4> buf{};
  std::size_t n = 0;
  buf[n++] = block.mask.bits();
  for (Word w : block.words) {
    buf[n++] = static_cast<std::uint8_t>(w);
    buf[n++] = static_cast<std::uint8_t>(w >> 8);
    buf[n++] = static_cast<std::uint8_t>(w >> 16);
    buf[n++] = static_cast<std::uint8_t>(w >> 24);
  }
  Fingerprint fp;
  crypto_generichash(fp.digest.data(), fp.digest.size(), buf.data(), n, nullptr, 0);
  return fp;
}

std::string digest_hex(std::string_view bytes) {
  ensure_sodium();
  std::array<std::uint8_t, 16> out{};
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
                     nullptr, 0);
  return to_hex(out);
}

void HashStore::touch(Slot& slot) {
  recency_.erase({slot.stamp, slot.entry.digest});
  if (slot.entry.count == 1) evictable_.erase({slot.stamp, slot.entry.digest});
  slot.stamp = ++clock_;
  recency_.insert({slot.stamp, slot.entry.digest});
  if (slot.entry.count == 1) evictable_.insert({slot.stamp, slot.entry.digest});
}

void HashStore::set_count(Slot& slot, std::uint16_t count) {
  bool was = slot.entry.count == 1;
  bool now = count == 1;
  slot.entry.count = count;
  if (was && !now) evictable_.erase({slot.stamp, slot.entry.digest});
  if (!was && now) evictable_.insert({slot.stamp, slot.entry.digest});
}

DedupLookup HashStore::lookup(const Fingerprint& digest, std::optional<FrameAddr> self_frame) {
  auto it = entries_.find(digest);
  if (it == entries_.end()) return {};
  Slot& slot = it->second;
  if (self_frame && slot.entry.ref_frame == *self_frame) return {};
  if (slot.entry.count == kMaxDupCount) return {false, slot.entry.ref_frame, true};
  set_count(slot, static_cast<std::uint16_t>(slot.entry.count + 1));
  touch(slot);
  return {true, slot.entry.ref_frame, false};
}

InsertResult HashStore::insert(const Fingerprint& digest, FrameAddr ref_frame) {
  if (entries_.contains(digest) || by_frame_.contains(ref_frame)) {
    ++rejections_;
    return InsertResult::Rejected;
  }
  if (capacity_ != 0 && entries_.size() >= capacity_) {
    if (evictable_.empty()) {
      ++rejections_;
      return InsertResult::Rejected;
    }
    Fingerprint victim = evictable_.begin()->second;
    auto vit = entries_.find(victim);
    recency_.erase({vit->second.stamp, victim});
    evictable_.erase(evictable_.begin());
    by_frame_.erase(vit->second.entry.ref_frame);
    entries_.erase(vit);
    ++evictions_;
  }
  Slot slot{{digest, ref_frame, 1}, ++clock_};
  recency_.insert({slot.stamp, digest});
  evictable_.insert({slot.stamp, digest});
  by_frame_.emplace(ref_frame, digest);
  entries_.emplace(digest, slot);
  return InsertResult::Inserted;
}

std::optional<std::uint16_t> HashStore::decrement_frame(FrameAddr frame) {
  auto fit = by_frame_.find(frame);
  if (fit == by_frame_.end()) return std::nullopt;
  auto it = entries_.find(fit->second);
  Slot& slot = it->second;
  if (slot.entry.count == 1) {
    recency_.erase({slot.stamp, slot.entry.digest});
    evictable_.erase({slot.stamp, slot.entry.digest});
    entries_.erase(it);
    by_frame_.erase(fit);
    return 0;
  }
  set_count(slot, static_cast<std::uint16_t>(slot.entry.count - 1));
  return slot.entry.count;
}

const HashEntry* HashStore::find(const Fingerprint& digest) const {
  auto it = entries_.find(digest);
  return it == entries_.end() ? nullptr : &it->second.entry;
}

const HashEntry* HashStore::find_by_frame(FrameAddr frame) const {
  auto fit = by_frame_.find(frame);
  return fit == by_frame_.end() ? nullptr : find(fit->second);
}

std::vector<HashEntry> HashStore::entries_lru_first() const {
  std::vector<HashEntry> out;
  out.reserve(entries_.size());
  for (const auto& [stamp, digest] : recency_) out.push_back(entries_.at(digest).entry);
  return out;
}

std::uint64_t dedup_decrement(HashStore& store, FrameTable& frames, FrameAddr ref_frame) {
  std::uint64_t remaining = frames.drop_ref(ref_frame);
  auto entry_left = store.decrement_frame(ref_frame);
  if (entry_left && *entry_left != remaining) {
    throw InvariantError("hash entry count diverged from frame refcount for frame " +
                         std::to_string(ref_frame.value));
  }
  if (remaining == 0 && !frames.home_in_use(ref_frame)) frames.release(ref_frame);
  return remaining;
}

}  // namespace cmdsim

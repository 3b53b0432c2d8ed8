// L2-level access traces: record model, text format, well-formedness.
//
// A trace is the stream of accesses arriving at the L2 (already filtered by
// the L1s). Reads name a single 32B sector; writes carry a sector mask and
// the full payload of every sector in the mask.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cmdsim {

inline constexpr std::size_t kLineBytes = 128;
inline constexpr std::size_t kSectorBytes = 32;
inline constexpr unsigned kSectorsPerLine = 4;
inline constexpr std::size_t kWordsPerSector = 8;
inline constexpr std::size_t kWordsPerLine = kWordsPerSector * kSectorsPerLine;

using Word = std::uint32_t;
using SectorData = std::array<Word, kWordsPerSector>;
using LineData = std::array<Word, kWordsPerLine>;

/// 128B-aligned block index (byte address / 128).
struct BlockAddr {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(BlockAddr, BlockAddr) = default;
};

/// Four sector-valid bits; bit i is sector i.
class SectorMask {
 public:
  constexpr SectorMask() = default;
  static constexpr SectorMask from_bits(std::uint8_t bits) {
    SectorMask m;
    m.bits_ = bits & 0xF;
    return m;
  }
  static constexpr SectorMask single(unsigned sector) {
    return from_bits(static_cast<std::uint8_t>(1u << sector));
  }
  static constexpr SectorMask full() { return from_bits(0xF); }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool test(unsigned sector) const { return (bits_ >> sector) & 1u; }
  constexpr void set(unsigned sector) { bits_ |= static_cast<std::uint8_t>(1u << sector); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr unsigned count() const {
    unsigned n = 0;
    for (unsigned s = 0; s < kSectorsPerLine; ++s) n += test(s);
    return n;
  }
  /// True iff every sector of `other` is also set here.
  constexpr bool covers(SectorMask other) const { return (bits_ & other.bits_) == other.bits_; }

  constexpr SectorMask operator|(SectorMask o) const { return from_bits(bits_ | o.bits_); }
  constexpr SectorMask operator&(SectorMask o) const { return from_bits(bits_ & o.bits_); }
  constexpr SectorMask operator~() const { return from_bits(static_cast<std::uint8_t>(~bits_)); }
  friend constexpr bool operator==(SectorMask, SectorMask) = default;

  /// "1011" style, leftmost character is sector 0.
  std::string to_string() const;
  /// Inverse of to_string; nullopt unless exactly four '0'/'1' characters.
  static std::optional<SectorMask> parse(std::string_view text);

 private:
  std::uint8_t bits_ = 0;
};

enum class AccessKind : std::uint8_t { Read, Write };

/// One access at the L2. For writes, `payload` holds 8 words per set mask
/// bit, ascending by sector then word offset.
struct TraceRecord {
  AccessKind kind = AccessKind::Read;
  BlockAddr blk;
  std::uint8_t sector = 0;  // reads only
  SectorMask mask;          // writes only
  std::vector<Word> payload;

  static TraceRecord read(BlockAddr blk, unsigned sector);
  static TraceRecord write(BlockAddr blk, SectorMask mask, std::vector<Word> payload);

  bool is_read() const { return kind == AccessKind::Read; }
  bool is_write() const { return kind == AccessKind::Write; }

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

std::vector<TraceRecord> parse_trace(std::istream& in);
std::vector<TraceRecord> parse_trace(std::string_view text);
TraceRecord parse_record(std::string_view line, std::size_t line_no = 1);

std::string format_record(const TraceRecord& rec);
void format_trace(std::span<const TraceRecord> records, std::ostream& out);
std::string format_trace(std::span<const TraceRecord> records);

struct TraceVerdict {
  bool valid = true;
  std::optional<std::size_t> first_violation;  // 0-based record index
  std::string reason;
};

/// Every read of an ever-written block must target a sector inside the union
/// of that block's earlier write masks. Never-written blocks are read-only
/// data and may be read freely.
TraceVerdict validate_trace(std::span<const TraceRecord> records);

/// Highest block address referenced, if any.
std::optional<BlockAddr> max_block(std::span<const TraceRecord> records);

/// Initial DRAM content of never-written blocks. splitmix64 over
/// (seed, blk, word_index); shared by the simulator and the oracle.
Word bg_word(std::uint64_t seed, BlockAddr blk, unsigned word_index);
SectorData bg_sector(std::uint64_t seed, BlockAddr blk, unsigned sector);

/// Payload words of `sector` inside a canonical (mask-compacted) word list.
SectorData payload_sector(SectorMask mask, std::span<const Word> payload, unsigned sector);

}  // namespace cmdsim

template <>
struct std::hash<cmdsim::BlockAddr> {
  std::size_t operator()(cmdsim::BlockAddr b) const noexcept { return std::hash<std::uint64_t>{}(b.value); }
};

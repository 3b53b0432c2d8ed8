#include "cmdsim/trace.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace cmdsim {

std::string SectorMask::to_string() const {
  std::string s(kSectorsPerLine, '0');
  for (unsigned i = 0; i < kSectorsPerLine; ++i) {
    if (test(i)) s[i] = '1';
  }
  return s;
}

std::optional<SectorMask> SectorMask::parse(std::string_view text) {
  if (text.size() != kSectorsPerLine) return std::nullopt;
  SectorMask m;
  for (unsigned i = 0; i < kSectorsPerLine; ++i) {
    if (text[i] == '1') {
      m.set(i);
    } else if (text[i] != '0') {
      return std::nullopt;
    }
  }
  return m;
}

TraceRecord TraceRecord::read(BlockAddr blk, unsigned sector) {
  TraceRecord r;
  r.kind = AccessKind::Read;
  r.blk = blk;
  r.sector = static_cast<std::uint8_t>(sector);
  return r;
}

TraceRecord TraceRecord::write(BlockAddr blk, SectorMask mask, std::vector<Word> payload) {
  TraceRecord r;
  r.kind = AccessKind::Write;
  r.blk = blk;
  r.mask = mask;
  r.payload = std::move(payload);
  return r;
}

TraceParseError::TraceParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("trace:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> split_fields(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

TraceRecord parse_record(std::string_view line, std::size_t line_no) {
  auto fields = split_fields(line);
  if (fields.empty()) throw TraceParseError(line_no, 1, "empty record");
  auto fail = [&](const Token& t, const std::string& msg) -> TraceParseError {
    return TraceParseError(line_no, t.column, msg);
  };

  const Token& op = fields[0];
  bool is_read = op.text == "R";
  if (!is_read && op.text != "W") throw fail(op, "expected 'R' or 'W', got '" + std::string(op.text) + "'");
  std::size_t expected = is_read ? 3 : 4;
  if (fields.size() != expected) {
    const Token& at = fields.size() > expected ? fields[expected] : fields.back();
    throw fail(at, "expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
  }

  const Token& blk_tok = fields[1];
  std::uint64_t blk = 0;
  {
    auto [p, ec] = std::from_chars(blk_tok.text.data(), blk_tok.text.data() + blk_tok.text.size(), blk, 16);
    if (ec != std::errc{} || p != blk_tok.text.data() + blk_tok.text.size()) {
      throw fail(blk_tok, "malformed block address '" + std::string(blk_tok.text) + "'");
    }
  }

  if (is_read) {
    const Token& sec = fields[2];
    if (sec.text.size() != 1 || sec.text[0] < '0' || sec.text[0] > '3') {
      throw fail(sec, "sector out of range '" + std::string(sec.text) + "'");
    }
    return TraceRecord::read(BlockAddr{blk}, static_cast<unsigned>(sec.text[0] - '0'));
  }

  const Token& mask_tok = fields[2];
  auto mask = SectorMask::parse(mask_tok.text);
  if (!mask) throw fail(mask_tok, "malformed mask '" + std::string(mask_tok.text) + "'");
  if (mask->empty()) throw fail(mask_tok, "write mask selects no sector");

  const Token& pay = fields[3];
  std::size_t want = mask->count() * kWordsPerSector * 8;
  if (pay.text.size() != want) {
    throw fail(pay, "payload length " + std::to_string(pay.text.size()) + " does not match mask (expected " +
                        std::to_string(want) + " hex chars)");
  }
  std::vector<Word> words(mask->count() * kWordsPerSector);
  for (std::size_t w = 0; w < words.size(); ++w) {
    Word v = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      std::size_t pos = w * 8 + k;
      int h = hex_value(pay.text[pos]);
      if (h < 0) throw TraceParseError(line_no, pay.column + pos, "non-hex payload character");
      v = (v << 4) | static_cast<Word>(h);
    }
    words[w] = v;
  }
  return TraceRecord::write(BlockAddr{blk}, *mask, std::move(words));
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v(line);
    auto first = v.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || v[first] == '#') continue;
    out.push_back(parse_record(v, line_no));
  }
  return out;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

std::string format_record(const TraceRecord& rec) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, rec.blk.value, 16);
  (void)ec;
  if (rec.is_read()) {
    out.reserve(24);
    out += "R ";
    out.append(buf, end);
    out += ' ';
    out += static_cast<char>('0' + rec.sector);
    return out;
  }
  out.reserve(8 + (end - buf) + rec.payload.size() * 8);
  out += "W ";
  out.append(buf, end);
  out += ' ';
  out += rec.mask.to_string();
  out += ' ';
  for (Word w : rec.payload) {
    for (int shift = 28; shift >= 0; shift -= 4) out += kHex[(w >> shift) & 0xF];
  }
  return out;
}

void format_trace(std::span<const TraceRecord> records, std::ostream& out) {
  for (const auto& r : records) out << format_record(r) << '\n';
}

std::string format_trace(std::span<const TraceRecord> records) {
  std::ostringstream out;
  format_trace(records, out);
  return out.str();
}

TraceVerdict validate_trace(std::span<const TraceRecord> records) {
  std::unordered_map<std::uint64_t, SectorMask> written;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.is_write()) {
      if (r.mask.empty() || r.payload.size() != r.mask.count() * kWordsPerSector) {
        return {false, i, "write record " + std::to_string(i + 1) + " has a malformed mask or payload"};
      }
      written[r.blk.value] = written[r.blk.value] | r.mask;
      continue;
    }
    if (r.sector >= kSectorsPerLine) {
      return {false, i, "read record " + std::to_string(i + 1) + " has sector out of range"};
    }
    auto it = written.find(r.blk.value);
    if (it != written.end() && !it->second.test(r.sector)) {
      return {false, i,
              "record " + std::to_string(i + 1) + " reads sector " + std::to_string(r.sector) +
                  " of a written block outside its written mask " + it->second.to_string()};
    }
  }
  return {};
}

std::optional<BlockAddr> max_block(std::span<const TraceRecord> records) {
  std::optional<BlockAddr> best;
  for (const auto& r : records) {
    if (!best || r.blk > *best) best = r.blk;
  }
  return best;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Word bg_word(std::uint64_t seed, BlockAddr blk, unsigned word_index) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ blk.value);
  h = splitmix64(h ^ word_index);
  return static_cast<Word>(h >> 32);
}

SectorData bg_sector(std::uint64_t seed, BlockAddr blk, unsigned sector) {
  SectorData d;
  for (unsigned w = 0; w < kWordsPerSector; ++w) {
    d[w] = bg_word(seed, blk, static_cast<unsigned>(sector * kWordsPerSector + w));
  }
  return d;
}

SectorData payload_sector(SectorMask mask, std::span<const Word> payload, unsigned sector) {
  SectorData d{};
  std::size_t slot = 0;
  for (unsigned s = 0; s < sector; ++s) slot += mask.test(s);
  std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(slot * kWordsPerSector), kWordsPerSector, d.begin());
  return d;
}

}  // namespace cmdsim

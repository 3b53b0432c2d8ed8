#include "cmdsim/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace cmdsim {

void GenParams::validate() const {
  auto bad = [](const std::string& msg) { throw std::invalid_argument("GenParams: " + msg); };
  if (n_blocks == 0) bad("n_blocks must be positive");
  if (n_blocks > (std::uint64_t{1} << 32)) bad("n_blocks exceeds the 32-bit frame address space");
  if (readonly_set_size > n_blocks) bad("readonly_set_size exceeds n_blocks");
  auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!unit(write_fraction)) bad("write_fraction must lie in [0,1]");
  if (!unit(intra_prob)) bad("intra_prob must lie in [0,1]");
  if (inter_pool_size == 0) bad("inter_pool_size must be at least 1");
  double sum = 0;
  for (double p : mask_distribution) {
    if (!unit(p)) bad("mask_distribution entries must lie in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) bad("mask_distribution must sum to 1");
  if (readonly_records() > n_records) bad("read-only passes need more records than n_records");
  if (n_records > readonly_records() && readonly_set_size == n_blocks) {
    bad("no writable blocks left for the read/write stream");
  }
}

namespace {

// mt19937_64's output sequence is fixed by the standard; the std
// distributions are not, so draws are derived by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : engine_() % n; }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Shared content `index` of the inter-dup pool; never uniform.
LineData pool_content(std::uint64_t seed, std::uint64_t index) {
  LineData line;
  std::uint64_t base = mix(seed ^ mix(index + 0x51ed27));
  for (std::size_t w = 0; w < kWordsPerLine; ++w) line[w] = static_cast<Word>(mix(base + w) >> 32);
  if (line[1] == line[0]) line[1] ^= 1;
  return line;
}

Word intra_word(Rng& rng) {
  static constexpr std::array<Word, 3> kCommon{0x00000000u, 0x3f800000u, 0xffffffffu};
  std::uint64_t pick = rng.below(4);
  if (pick < kCommon.size()) return kCommon[pick];
  return static_cast<Word>(rng.next() >> 32);
}

SectorMask draw_mask(Rng& rng, const std::array<double, 4>& dist) {
  double u = rng.unit();
  unsigned k = 4;
  double acc = 0;
  for (unsigned i = 0; i < 4; ++i) {
    acc += dist[i];
    if (u < acc) {
      k = i + 1;
      break;
    }
  }
  while (k > 1 && dist[k - 1] == 0.0) --k;  // rounding slack at the top end
  std::array<unsigned, 4> order{0, 1, 2, 3};
  for (unsigned i = 3; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  SectorMask m;
  for (unsigned i = 0; i < k; ++i) m.set(order[i]);
  return m;
}

}  // namespace

std::vector<TraceRecord> generate_trace(const GenParams& p) {
  p.validate();
  Rng rng(p.seed);

  const std::uint64_t writable = p.n_blocks - p.readonly_set_size;
  const std::uint64_t ro_first = writable;
  std::uint64_t ro_left = p.readonly_records();
  std::uint64_t main_left = p.n_records - ro_left;
  std::uint64_t ro_cursor = 0;
  std::vector<SectorMask> written(writable);

  std::vector<TraceRecord> out;
  out.reserve(p.n_records);
  while (ro_left + main_left > 0) {
    bool take_ro = ro_left > 0 && rng.below(ro_left + main_left) < ro_left;
    if (take_ro) {
      std::uint64_t pos = ro_cursor % (p.readonly_set_size * kSectorsPerLine);
      ++ro_cursor;
      --ro_left;
      out.push_back(TraceRecord::read(BlockAddr{ro_first + pos / kSectorsPerLine},
                                      static_cast<unsigned>(pos % kSectorsPerLine)));
      continue;
    }
    --main_left;
    BlockAddr blk{rng.below(writable)};
    if (!rng.chance(p.write_fraction)) {
      SectorMask m = written[blk.value];
      unsigned sector;
      if (m.empty()) {
        sector = static_cast<unsigned>(rng.below(kSectorsPerLine));
      } else {
        std::uint64_t nth = rng.below(m.count());
        sector = 0;
        for (unsigned s = 0; s < kSectorsPerLine; ++s) {
          if (m.test(s) && nth-- == 0) {
            sector = s;
            break;
          }
        }
      }
      out.push_back(TraceRecord::read(blk, sector));
      continue;
    }

    SectorMask mask = draw_mask(rng, p.mask_distribution);
    std::vector<Word> payload;
    payload.reserve(mask.count() * kWordsPerSector);
    if (rng.chance(p.intra_prob)) {
      payload.assign(mask.count() * kWordsPerSector, intra_word(rng));
    } else {
      LineData content = pool_content(p.seed, rng.below(p.inter_pool_size));
      for (unsigned s = 0; s < kSectorsPerLine; ++s) {
        if (!mask.test(s)) continue;
        auto first = content.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSector);
        payload.insert(payload.end(), first, first + kWordsPerSector);
      }
    }
    written[blk.value] = written[blk.value] | mask;
    out.push_back(TraceRecord::write(blk, mask, std::move(payload)));
  }
  return out;
}

}  // namespace cmdsim

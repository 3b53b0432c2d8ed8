#include "cmdsim/oracle.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace cmdsim::oracle {

const char* to_string(Kind kind) {
  switch (kind) {
    case Kind::Intra: return "intra";
    case Kind::Inter: return "inter";
    case Kind::Unique: return "unique";
  }
  return "?";
}

namespace {

using ContentKey = std::pair<std::uint8_t, std::vector<Word>>;

ContentKey key_of(const BlockContent& c) {
  ContentKey k{c.mask.bits(), {}};
  for (unsigned s = 0; s < kSectorsPerLine; ++s) {
    if (!c.mask.test(s)) continue;
    for (std::size_t w = 0; w < kWordsPerSector; ++w) k.second.push_back(c.line[s * kWordsPerSector + w]);
  }
  return k;
}

bool uniform(const ContentKey& k) {
  return std::all_of(k.second.begin(), k.second.end(), [&](Word w) { return w == k.second.front(); });
}

struct Group {
  std::set<std::uint64_t> holders;
  std::size_t first_writer;
};

}  // namespace

ReplayResult oracle_replay(std::span<const TraceRecord> trace, std::uint64_t bg_seed) {
  ReplayResult out;
  std::map<ContentKey, Group> groups;
  std::map<std::uint64_t, ContentKey> held;  // block -> its non-uniform content

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceRecord& r = trace[i];
    if (r.is_read()) {
      SectorData d;
      auto it = out.blocks.find(r.blk.value);
      if (it == out.blocks.end()) {
        d = bg_sector(bg_seed, r.blk, r.sector);
      } else {
        if (!it->second.mask.test(r.sector)) {
          throw std::invalid_argument("oracle: record " + std::to_string(i + 1) + " reads an unwritten sector");
        }
        std::copy_n(it->second.line.begin() + r.sector * kWordsPerSector, kWordsPerSector, d.begin());
      }
      out.reads.push_back(d);
      continue;
    }

    if (r.mask.empty() || r.payload.size() != r.mask.count() * kWordsPerSector) {
      throw std::invalid_argument("oracle: record " + std::to_string(i + 1) + " is a malformed write");
    }
    BlockContent& c = out.blocks[r.blk.value];
    std::size_t slot = 0;
    for (unsigned s = 0; s < kSectorsPerLine; ++s) {
      if (!r.mask.test(s)) continue;
      std::copy_n(r.payload.begin() + slot * kWordsPerSector, kWordsPerSector, c.line.begin() + s * kWordsPerSector);
      ++slot;
    }
    c.mask = c.mask | r.mask;

    if (auto h = held.find(r.blk.value); h != held.end()) {
      auto g = groups.find(h->second);
      g->second.holders.erase(r.blk.value);
      if (g->second.holders.empty()) groups.erase(g);
      held.erase(h);
    }

    ContentKey key = key_of(c);
    Classification cls{i, Kind::Unique, std::nullopt};
    if (uniform(key)) {
      cls.kind = Kind::Intra;
    } else {
      auto [g, fresh] = groups.try_emplace(key, Group{{}, i});
      if (!fresh) {
        cls.kind = Kind::Inter;
        cls.dup_of = g->second.first_writer;
      }
      g->second.holders.insert(r.blk.value);
      held.emplace(r.blk.value, std::move(key));
    }
    out.writes.push_back(cls);
  }
  return out;
}

std::map<std::pair<std::uint64_t, unsigned>, SectorData> oracle_read_all(const ReplayResult& replay,
                                                                          std::uint64_t n_blocks,
                                                                          std::uint64_t bg_seed) {
  std::map<std::pair<std::uint64_t, unsigned>, SectorData> out;
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    auto it = replay.blocks.find(b);
    for (unsigned s = 0; s < kSectorsPerLine; ++s) {
      if (it == replay.blocks.end()) {
        out[{b, s}] = bg_sector(bg_seed, BlockAddr{b}, s);
      } else if (it->second.mask.test(s)) {
        SectorData d;
        std::copy_n(it->second.line.begin() + s * kWordsPerSector, kWordsPerSector, d.begin());
        out[{b, s}] = d;
      }
    }
  }
  return out;
}

}  // namespace cmdsim::oracle

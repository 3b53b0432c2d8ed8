// Brute-force reference model: exact dedup classification with unbounded
// tables and exact last-writer content. Depends only on the trace module.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cmdsim/trace.hpp"

namespace cmdsim::oracle {

enum class Kind : std::uint8_t { Intra, Inter, Unique };

const char* to_string(Kind kind);

struct Classification {
  std::size_t record = 0;  // index of the write in the replayed trace
  Kind kind = Kind::Unique;
  /// For Inter: index of the write that first stored the shared content
  /// among its current holders.
  std::optional<std::size_t> dup_of;
};

/// Materialized sectors of one block.
struct BlockContent {
  SectorMask mask;
  LineData line{};
};

struct ReplayResult {
  std::vector<Classification> writes;
  std::map<std::uint64_t, BlockContent> blocks;  // written blocks only
  /// Value each read returns, in trace order.
  std::vector<SectorData> reads;
};

/// Replays `trace` treating every write as arriving directly at memory: the
/// write merges with the block's stored sectors, then is Intra if all valid
/// words match, Inter if another block currently holds the same mask and
/// bytes, else Unique. Throws std::invalid_argument on ill-formed traces.
ReplayResult oracle_replay(std::span<const TraceRecord> trace, std::uint64_t bg_seed);

/// Expected content of every materialized sector: written sectors of written
/// blocks, and all four sectors of untouched blocks below n_blocks.
std::map<std::pair<std::uint64_t, unsigned>, SectorData> oracle_read_all(const ReplayResult& replay,
                                                                          std::uint64_t n_blocks,
                                                                          std::uint64_t bg_seed);

}  // namespace cmdsim::oracle

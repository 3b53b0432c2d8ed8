// Parameterized synthetic trace generator.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmdsim/trace.hpp"

namespace cmdsim {

/// Knobs for generate_trace. The last `readonly_set_size` blocks of the
/// address space are never written; each of their sectors is read
/// `readonly_rereads` times in cyclic passes interleaved with the main
/// read/write stream over the remaining blocks.
struct GenParams {
  std::uint64_t seed = 1;
  std::uint64_t n_blocks = 1024;
  std::uint64_t n_records = 10000;
  double write_fraction = 0.5;
  double intra_prob = 0.3;
  std::uint64_t inter_pool_size = 64;
  std::uint64_t readonly_set_size = 0;
  std::uint64_t readonly_rereads = 0;
  /// Probability that a write covers 1, 2, 3 or 4 sectors.
  std::array<double, 4> mask_distribution{0.1, 0.1, 0.1, 0.7};

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
  std::uint64_t readonly_records() const { return readonly_set_size * kSectorsPerLine * readonly_rereads; }
};

std::vector<TraceRecord> generate_trace(const GenParams& params);

}  // namespace cmdsim

// Simulation configuration and its JSON form.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cmdsim/dedup_engine.hpp"
#include "cmdsim/generator.hpp"
#include "cmdsim/metadata_store.hpp"
#include "cmdsim/sector_cache.hpp"
#include "cmdsim/stats_report.hpp"

namespace cmdsim {

struct SimConfig {
  CacheConfig cache;
  MetadataCacheConfig metadata;
  std::uint64_t hash_entries = kDefaultHashEntries;  // per partition; 0 = unbounded
  CostModel cost;
  std::uint64_t n_blocks = 0;  // 0 = derive from the trace
  std::uint64_t seed = 0;      // background-content seed
  bool flush_at_end = true;

  /// 4 MiB 16-way L2 over 8 partitions, 16-entry FIFOs, 48/5/10 KiB
  /// address/type/mask caches and a 48 KiB hash store per controller.
  static SimConfig full_system();
  void validate() const;
};

/// Canonical JSON for a config (stable key order).
std::string to_json(const SimConfig& config, bool pretty = false);

/// Overlays the keys present in `json` onto `base`. Unknown keys are errors.
/// A top-level "gen" object, if present, is applied to `gen` when non-null.
SimConfig config_from_json(std::string_view json, SimConfig base = SimConfig::full_system(),
                           GenParams* gen = nullptr);

std::string to_json(const GenParams& params);

}  // namespace cmdsim

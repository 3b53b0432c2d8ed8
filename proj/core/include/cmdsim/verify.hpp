// Simulator-vs-oracle equivalence checking.
#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "cmdsim/config.hpp"
#include "cmdsim/stats_report.hpp"
#include "cmdsim/trace.hpp"

namespace cmdsim {

struct VerifyOptions {
  /// Also read every materialized sector back through the L2 before flushing.
  bool pipeline_readback = true;
  /// Replay the controller's writeback stream through the oracle and compare
  /// Intra/Inter/Unique per writeback. Only meaningful with an unbounded
  /// hash store.
  bool check_classification = false;
  /// Run the full refcount/frame/hash consistency scan every N trace
  /// records (0 = only at the end).
  std::uint64_t invariant_interval = 0;
};

struct VerifyResult {
  bool equivalent = true;
  std::string divergence;  // first mismatch, empty when equivalent
  std::uint64_t reads_checked = 0;
  std::uint64_t sectors_checked = 0;
  std::uint64_t writebacks_classified = 0;
};

VerifyResult verify_equivalence(std::span<const TraceRecord> trace, const SimConfig& config, Mode mode,
                                const VerifyOptions& options = {});

/// Checks each mode in turn against one oracle replay; returns the first
/// divergence, or summed check counts when all modes agree.
VerifyResult verify_equivalence(std::span<const TraceRecord> trace, const SimConfig& config,
                                std::span<const Mode> modes, const VerifyOptions& options = {});

}  // namespace cmdsim

// Traffic counters, derived metrics and their stable JSON/CSV encodings.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmdsim {

enum class Mode : std::uint8_t { Baseline, Dedup, DedupCar, Cmd };

inline constexpr Mode kAllModes[] = {Mode::Baseline, Mode::Dedup, Mode::DedupCar, Mode::Cmd};

const char* to_string(Mode mode);
/// Accepts baseline, dedup, dedup_car (or dedup+car, dedupcar) and cmd.
std::optional<Mode> parse_mode(std::string_view text);

/// Class of a memory transaction. CarCopy is an on-chip L2 copy, never DRAM.
enum class RequestClass : std::uint8_t { Write, DataRead, ReadOnly, Metadata, DedupRead, CarCopy };

const char* to_string(RequestClass cls);

/// Per-event latencies (cycles) and relative energy weights.
struct CostModel {
  double dram_read = 450;
  double dram_write = 450;
  double metadata_cache_hit = 20;
  double fingerprint = 228;
  double l2_hit = 120;
  double fifo_hit = 120;
  double energy_dram_read = 100;
  double energy_dram_write = 100;
  double energy_metadata_hit = 1;
  double energy_fingerprint = 2;
  double energy_l2_access = 5;
  double energy_fifo_hit = 1;

  void validate() const;
  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct TrafficCounts {
  std::uint64_t write = 0;
  std::uint64_t data_read = 0;
  std::uint64_t read_only = 0;
  std::uint64_t metadata_read = 0;
  std::uint64_t metadata_write = 0;
  std::uint64_t dedup_read = 0;
  std::uint64_t car_copy = 0;
  std::uint64_t fifo_hit = 0;
  std::uint64_t l2_hit = 0;
  std::uint64_t l2_miss = 0;

  TrafficCounts& operator+=(const TrafficCounts& o);
  friend bool operator==(const TrafficCounts&, const TrafficCounts&) = default;
};

struct DedupCounts {
  std::uint64_t intra_removed = 0;
  std::uint64_t inter_removed = 0;
  std::uint64_t unique_writes = 0;
  std::uint64_t writebacks = 0;  // write requests reaching the controller

  DedupCounts& operator+=(const DedupCounts& o);
  friend bool operator==(const DedupCounts&, const DedupCounts&) = default;
};

struct EventCounts {
  std::uint64_t metadata_hit = 0;
  std::uint64_t fingerprints = 0;
  std::uint64_t write_bytes = 0;

  EventCounts& operator+=(const EventCounts& o);
  friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

struct DerivedMetrics {
  std::uint64_t offchip_total = 0;
  double dedup_ratio = 0;
  double extra_read_ratio = 0;
  double est_cycles = 0;
  double est_energy = 0;
  friend bool operator==(const DerivedMetrics&, const DerivedMetrics&) = default;
};

struct TrafficReport {
  Mode mode = Mode::Baseline;
  std::string trace_digest;
  std::uint64_t records = 0;
  std::string config;  // compact JSON echo of the simulation config
  TrafficCounts counts;
  DedupCounts dedup;
  EventCounts events;
  DerivedMetrics derived;

  /// Fills `derived` from the counters.
  void finalize(const CostModel& cost);
  /// DRAM transactions over all classes.
  std::uint64_t dram_transactions() const;
  friend bool operator==(const TrafficReport&, const TrafficReport&) = default;
};

enum class ReportFormat : std::uint8_t { Json, Csv };
std::optional<ReportFormat> parse_format(std::string_view text);

/// Throws InvariantError if offchip_total disagrees with the class sum.
std::string emit(const TrafficReport& report, ReportFormat format);
TrafficReport parse_report_json(std::string_view json);

/// Percent drop of `value` against `baseline`, rounded to 2 decimals;
/// 0 when the baseline is 0.
double reduction_pct(std::uint64_t baseline, std::uint64_t value);

struct Comparison {
  std::vector<TrafficReport> reports;  // reports[0] is the reference mode
};

/// Classes listed in comparison reductions.
inline constexpr std::string_view kReductionClasses[] = {"write",      "data_read", "read_only",
                                                         "metadata",   "dedup_read", "offchip_total"};
std::uint64_t class_count(const TrafficReport& report, std::string_view cls);

std::string emit(const Comparison& comparison, ReportFormat format);

}  // namespace cmdsim

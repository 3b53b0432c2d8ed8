#include "cmdsim/stats_report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cmdsim/metadata_store.hpp"
#include "json.hpp"

namespace cmdsim {

using ojson = nlohmann::ordered_json;

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Baseline: return "baseline";
    case Mode::Dedup: return "dedup";
    case Mode::DedupCar: return "dedup_car";
    case Mode::Cmd: return "cmd";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "baseline") return Mode::Baseline;
  if (s == "dedup") return Mode::Dedup;
  if (s == "dedup_car" || s == "dedup+car" || s == "dedupcar") return Mode::DedupCar;
  if (s == "cmd") return Mode::Cmd;
  return std::nullopt;
}

const char* to_string(RequestClass cls) {
  switch (cls) {
    case RequestClass::Write: return "write";
    case RequestClass::DataRead: return "data_read";
    case RequestClass::ReadOnly: return "read_only";
    case RequestClass::Metadata: return "metadata";
    case RequestClass::DedupRead: return "dedup_read";
    case RequestClass::CarCopy: return "car_copy";
  }
  return "?";
}

void CostModel::validate() const {
  for (double v : {dram_read, dram_write, metadata_cache_hit, fingerprint, l2_hit, fifo_hit, energy_dram_read,
                   energy_dram_write, energy_metadata_hit, energy_fingerprint, energy_l2_access, energy_fifo_hit}) {
    if (!(v >= 0)) throw std::invalid_argument("CostModel: costs must be non-negative");
  }
}

TrafficCounts& TrafficCounts::operator+=(const TrafficCounts& o) {
  write += o.write;
  data_read += o.data_read;
  read_only += o.read_only;
  metadata_read += o.metadata_read;
  metadata_write += o.metadata_write;
  dedup_read += o.dedup_read;
  car_copy += o.car_copy;
  fifo_hit += o.fifo_hit;
  l2_hit += o.l2_hit;
  l2_miss += o.l2_miss;
  return *this;
}

DedupCounts& DedupCounts::operator+=(const DedupCounts& o) {
  intra_removed += o.intra_removed;
  inter_removed += o.inter_removed;
  unique_writes += o.unique_writes;
  writebacks += o.writebacks;
  return *this;
}

EventCounts& EventCounts::operator+=(const EventCounts& o) {
  metadata_hit += o.metadata_hit;
  fingerprints += o.fingerprints;
  write_bytes += o.write_bytes;
  return *this;
}

std::uint64_t TrafficReport::dram_transactions() const {
  return counts.write + counts.data_read + counts.read_only + counts.metadata_read + counts.metadata_write +
         counts.dedup_read;
}

void TrafficReport::finalize(const CostModel& c) {
  const auto& k = counts;
  derived.offchip_total = dram_transactions();
  derived.dedup_ratio = static_cast<double>(dedup.intra_removed + dedup.inter_removed) /
                        static_cast<double>(std::max<std::uint64_t>(1, dedup.writebacks));
  derived.extra_read_ratio =
      static_cast<double>(k.dedup_read) / static_cast<double>(std::max<std::uint64_t>(1, derived.offchip_total));
  auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  double reads = d(k.data_read + k.read_only + k.dedup_read + k.metadata_read);
  double writes = d(k.write + k.metadata_write);
  derived.est_cycles = c.dram_read * reads + c.dram_write * writes + c.metadata_cache_hit * d(events.metadata_hit) +
                       c.fingerprint * d(events.fingerprints) + c.l2_hit * d(k.l2_hit + k.car_copy) +
                       c.fifo_hit * d(k.fifo_hit);
  derived.est_energy = c.energy_dram_read * reads + c.energy_dram_write * writes +
                       c.energy_metadata_hit * d(events.metadata_hit) +
                       c.energy_fingerprint * d(events.fingerprints) +
                       c.energy_l2_access * d(k.l2_hit + k.l2_miss + k.car_copy) + c.energy_fifo_hit * d(k.fifo_hit);
}

std::optional<ReportFormat> parse_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

namespace {

void check_totality(const TrafficReport& r) {
  if (r.derived.offchip_total != r.dram_transactions()) {
    throw InvariantError("offchip_total does not equal the sum of DRAM request classes");
  }
}

ojson to_ojson(const TrafficReport& r) {
  ojson j;
  j["mode"] = to_string(r.mode);
  j["trace_digest"] = r.trace_digest;
  j["records"] = r.records;
  j["config"] = r.config.empty() ? ojson::object() : ojson::parse(r.config);
  const auto& c = r.counts;
  j["counts"] = ojson{{"write", c.write},
                      {"data_read", c.data_read},
                      {"read_only", c.read_only},
                      {"metadata_read", c.metadata_read},
                      {"metadata_write", c.metadata_write},
                      {"dedup_read", c.dedup_read},
                      {"car_copy", c.car_copy},
                      {"fifo_hit", c.fifo_hit},
                      {"l2_hit", c.l2_hit},
                      {"l2_miss", c.l2_miss}};
  j["dedup"] = ojson{{"intra_removed", r.dedup.intra_removed},
                     {"inter_removed", r.dedup.inter_removed},
                     {"unique_writes", r.dedup.unique_writes},
                     {"writebacks", r.dedup.writebacks}};
  j["events"] = ojson{{"metadata_hit", r.events.metadata_hit},
                      {"fingerprints", r.events.fingerprints},
                      {"write_bytes", r.events.write_bytes}};
  j["derived"] = ojson{{"offchip_total", r.derived.offchip_total},
                       {"dedup_ratio", r.derived.dedup_ratio},
                       {"extra_read_ratio", r.derived.extra_read_ratio},
                       {"est_cycles", r.derived.est_cycles},
                       {"est_energy", r.derived.est_energy}};
  return j;
}

constexpr std::string_view kCountClasses[] = {"write",          "data_read",  "read_only", "metadata_read",
                                              "metadata_write", "dedup_read", "car_copy",  "fifo_hit",
                                              "l2_hit",         "l2_miss",    "offchip_total"};

std::string format_pct(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << (v == 0 ? 0.0 : v);  // no "-0.00"
  return os.str();
}

}  // namespace

std::uint64_t class_count(const TrafficReport& r, std::string_view cls) {
  const auto& c = r.counts;
  if (cls == "write") return c.write;
  if (cls == "data_read") return c.data_read;
  if (cls == "read_only") return c.read_only;
  if (cls == "metadata") return c.metadata_read + c.metadata_write;
  if (cls == "metadata_read") return c.metadata_read;
  if (cls == "metadata_write") return c.metadata_write;
  if (cls == "dedup_read") return c.dedup_read;
  if (cls == "car_copy") return c.car_copy;
  if (cls == "fifo_hit") return c.fifo_hit;
  if (cls == "l2_hit") return c.l2_hit;
  if (cls == "l2_miss") return c.l2_miss;
  if (cls == "offchip_total") return r.derived.offchip_total;
  throw std::invalid_argument("unknown traffic class '" + std::string(cls) + "'");
}

std::string emit(const TrafficReport& report, ReportFormat format) {
  check_totality(report);
  if (format == ReportFormat::Json) return to_ojson(report).dump(2) + "\n";
  std::string out = "mode,class,count\n";
  for (auto cls : kCountClasses) {
    out += to_string(report.mode);
    out += ',';
    out += cls;
    out += ',';
    out += std::to_string(class_count(report, cls));
    out += '\n';
  }
  return out;
}

TrafficReport parse_report_json(std::string_view text) {
  ojson j = ojson::parse(text);
  TrafficReport r;
  auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw std::invalid_argument("report: unknown mode");
  r.mode = *mode;
  r.trace_digest = j.at("trace_digest").get<std::string>();
  r.records = j.at("records").get<std::uint64_t>();
  const auto& cfg = j.at("config");
  r.config = cfg.empty() ? std::string() : cfg.dump();
  const auto& c = j.at("counts");
  r.counts.write = c.at("write");
  r.counts.data_read = c.at("data_read");
  r.counts.read_only = c.at("read_only");
  r.counts.metadata_read = c.at("metadata_read");
  r.counts.metadata_write = c.at("metadata_write");
  r.counts.dedup_read = c.at("dedup_read");
  r.counts.car_copy = c.at("car_copy");
  r.counts.fifo_hit = c.at("fifo_hit");
  r.counts.l2_hit = c.at("l2_hit");
  r.counts.l2_miss = c.at("l2_miss");
  const auto& d = j.at("dedup");
  r.dedup.intra_removed = d.at("intra_removed");
  r.dedup.inter_removed = d.at("inter_removed");
  r.dedup.unique_writes = d.at("unique_writes");
  r.dedup.writebacks = d.at("writebacks");
  const auto& e = j.at("events");
  r.events.metadata_hit = e.at("metadata_hit");
  r.events.fingerprints = e.at("fingerprints");
  r.events.write_bytes = e.at("write_bytes");
  const auto& x = j.at("derived");
  r.derived.offchip_total = x.at("offchip_total");
  r.derived.dedup_ratio = x.at("dedup_ratio");
  r.derived.extra_read_ratio = x.at("extra_read_ratio");
  r.derived.est_cycles = x.at("est_cycles");
  r.derived.est_energy = x.at("est_energy");
  return r;
}

double reduction_pct(std::uint64_t baseline, std::uint64_t value) {
  if (baseline == 0) return 0.0;
  double pct = (static_cast<double>(baseline) - static_cast<double>(value)) / static_cast<double>(baseline) * 100.0;
  return std::round(pct * 100.0) / 100.0;
}

std::string emit(const Comparison& cmp, ReportFormat format) {
  if (cmp.reports.empty()) throw std::invalid_argument("comparison has no reports");
  for (const auto& r : cmp.reports) check_totality(r);
  const TrafficReport& ref = cmp.reports.front();

  if (format == ReportFormat::Csv) {
    std::string out = "mode,class,count,reduction_pct\n";
    for (const auto& r : cmp.reports) {
      for (auto cls : kReductionClasses) {
        out += to_string(r.mode);
        out += ',';
        out += cls;
        out += ',';
        out += std::to_string(class_count(r, cls));
        out += ',';
        out += format_pct(reduction_pct(class_count(ref, cls), class_count(r, cls)));
        out += '\n';
      }
    }
    return out;
  }

  ojson j;
  j["reference_mode"] = to_string(ref.mode);
  j["trace_digest"] = ref.trace_digest;
  ojson modes = ojson::array();
  for (const auto& r : cmp.reports) modes.push_back(to_ojson(r));
  j["modes"] = std::move(modes);
  ojson reductions = ojson::object();
  for (const auto& r : cmp.reports) {
    ojson row = ojson::object();
    for (auto cls : kReductionClasses) {
      row[std::string(cls)] = reduction_pct(class_count(ref, cls), class_count(r, cls));
    }
    reductions[to_string(r.mode)] = std::move(row);
  }
  j["reductions_pct"] = std::move(reductions);
  return j.dump(2) + "\n";
}

}  // namespace cmdsim

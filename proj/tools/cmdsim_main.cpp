// cmdsim: trace generation, simulation, mode comparison, parameter sweeps
// and oracle verification for the deduplicating L2/memory-controller model.

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cmdsim/config.hpp"
#include "cmdsim/generator.hpp"
#include "cmdsim/simulator.hpp"
#include "cmdsim/stats_report.hpp"
#include "cmdsim/trace.hpp"
#include "cmdsim/verify.hpp"

namespace {

using namespace cmdsim;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> partitions;
  std::optional<std::uint64_t> l2_bytes;
  std::optional<std::uint32_t> assoc;
  std::optional<std::uint32_t> fifo_entries;
  std::optional<std::uint64_t> hash_entries;
  std::optional<std::uint64_t> addr_cache_bytes;
  std::optional<std::uint64_t> type_cache_bytes;
  std::optional<std::uint64_t> mask_cache_bytes;
  std::optional<std::uint64_t> n_blocks;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file (flags override its values)");
    app->add_option("--seed", seed, "Background-content seed");
    app->add_option("--partitions", partitions, "Number of L2 partitions / memory controllers");
    app->add_option("--l2-bytes", l2_bytes, "Total L2 capacity in bytes");
    app->add_option("--assoc", assoc, "L2 associativity");
    app->add_option("--fifo-entries", fifo_entries, "Read-only FIFO entries per partition");
    app->add_option("--hash-entries", hash_entries, "Hash-store entries per partition (0 = unbounded)");
    app->add_option("--addr-cache-bytes", addr_cache_bytes, "Address-mapping cache bytes per partition");
    app->add_option("--type-cache-bytes", type_cache_bytes, "Type-flag cache bytes per partition");
    app->add_option("--mask-cache-bytes", mask_cache_bytes, "Sector-mask cache bytes per partition");
    app->add_option("--blocks", n_blocks, "Logical address space in 128B blocks (0 = from trace)");
  }

  SimConfig resolve(GenParams* gen = nullptr) const {
    SimConfig c = SimConfig::full_system();
    if (!config_path.empty()) c = config_from_json(read_file(config_path), c, gen);
    if (seed) c.seed = *seed;
    if (partitions) c.cache.n_partitions = *partitions;
    if (l2_bytes) c.cache.capacity_bytes = *l2_bytes;
    if (assoc) c.cache.associativity = *assoc;
    if (fifo_entries) c.cache.fifo_entries_per_partition = *fifo_entries;
    if (hash_entries) c.hash_entries = *hash_entries;
    if (addr_cache_bytes) c.metadata.addr_cache = *addr_cache_bytes;
    if (type_cache_bytes) c.metadata.type_cache = *type_cache_bytes;
    if (mask_cache_bytes) c.metadata.mask_cache = *mask_cache_bytes;
    if (n_blocks) c.n_blocks = *n_blocks;
    c.validate();
    return c;
  }

  static std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

std::vector<TraceRecord> load_trace(const std::string& path) {
  if (path == "-") return parse_trace(std::cin);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path);
  return parse_trace(in);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

Mode mode_or_throw(const std::string& text) {
  auto m = parse_mode(text);
  if (!m) throw std::runtime_error("unknown mode '" + text + "'");
  return *m;
}

ReportFormat format_or_throw(const std::string& text) {
  auto f = parse_format(text);
  if (!f) throw std::runtime_error("unknown report format '" + text + "'");
  return *f;
}

std::vector<std::uint64_t> parse_values(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    out.push_back(std::stoull(item, &used));
    if (used != item.size()) throw std::runtime_error("bad sweep value '" + item + "'");
  }
  if (out.empty()) throw std::runtime_error("--values is empty");
  return out;
}

void apply_param(SimConfig& c, const std::string& param, std::uint64_t v) {
  if (param == "fifo_entries") {
    c.cache.fifo_entries_per_partition = static_cast<std::uint32_t>(v);
  } else if (param == "hash_entries") {
    c.hash_entries = v;
  } else if (param == "hash_cache_bytes") {
    c.hash_entries = std::max<std::uint64_t>(1, v / kHashEntryBytes);
  } else if (param == "addr_cache_bytes") {
    c.metadata.addr_cache = v;
  } else if (param == "type_cache_bytes") {
    c.metadata.type_cache = v;
  } else if (param == "mask_cache_bytes") {
    c.metadata.mask_cache = v;
  } else if (param == "l2_bytes") {
    c.cache.capacity_bytes = v;
  } else if (param == "assoc") {
    c.cache.associativity = static_cast<std::uint32_t>(v);
  } else {
    throw std::runtime_error("unknown sweep parameter '" + param + "'");
  }
  c.validate();
}

std::string sweep_row(const std::string& param, std::uint64_t value, const TrafficReport& r,
                      const TrafficReport& base) {
  std::ostringstream os;
  os << param << ',' << value << ',' << to_string(r.mode) << ',' << r.derived.offchip_total << ',' << r.counts.write
     << ',' << r.counts.data_read << ',' << r.counts.read_only << ',' << r.counts.metadata_read << ','
     << r.counts.metadata_write << ',' << r.counts.dedup_read << ',' << r.counts.car_copy << ',' << r.counts.fifo_hit
     << ',';
  os.setf(std::ios::fixed);
  os.precision(4);
  os << r.derived.dedup_ratio << ',';
  os.precision(2);
  os << reduction_pct(base.counts.read_only, r.counts.read_only) << ','
     << reduction_pct(base.derived.offchip_total, r.derived.offchip_total) << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cmdsim - deduplicating GPU L2 / memory-controller traffic simulator"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Synthesize a trace");
  GenParams gp;
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> g_seed, g_blocks, g_records, g_pool, g_ro_set, g_ro_rereads;
  std::optional<double> g_wf, g_intra;
  std::optional<std::vector<double>> g_mask;
  gen->add_option("--config", gen_config, "JSON config whose \"gen\" object supplies defaults");
  gen->add_option("--seed", g_seed, "Generator seed");
  gen->add_option("--blocks", g_blocks, "Number of 128B blocks");
  gen->add_option("--records", g_records, "Number of records");
  gen->add_option("--write-fraction", g_wf, "Share of read/write-stream records that are writes");
  gen->add_option("--intra-prob", g_intra, "Probability a write is intra-duplicate");
  gen->add_option("--inter-pool", g_pool, "Number of distinct shared contents");
  gen->add_option("--readonly-set", g_ro_set, "Never-written blocks read in cyclic passes");
  gen->add_option("--readonly-rereads", g_ro_rereads, "Passes over the read-only set");
  gen->add_option("--mask-dist", g_mask, "Probabilities of 1..4-sector writes")->delimiter(',')->expected(4);
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Simulate one mode on one trace");
  Overrides run_ov;
  std::string run_trace, run_mode = "cmd", run_report = "json", run_out;
  run_ov.attach(run_cmd);
  run_cmd->add_option("--trace", run_trace, "Trace file ('-' for stdin)")->required();
  run_cmd->add_option("--mode", run_mode, "baseline | dedup | dedup_car | cmd");
  run_cmd->add_option("--report", run_report, "json | csv");
  run_cmd->add_option("--out", run_out, "Output file (default stdout)");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Run all four modes side by side");
  Overrides cmp_ov;
  std::string cmp_trace, cmp_report = "json", cmp_out;
  cmp_ov.attach(cmp_cmd);
  cmp_cmd->add_option("--trace", cmp_trace, "Trace file ('-' for stdin)")->required();
  cmp_cmd->add_option("--report", cmp_report, "json | csv");
  cmp_cmd->add_option("--out", cmp_out, "Output file (default stdout)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Vary one parameter and tabulate metrics as CSV");
  Overrides sweep_ov;
  std::string sweep_trace, sweep_mode = "cmd", sweep_param, sweep_values, sweep_out;
  unsigned sweep_jobs = std::max(1u, std::thread::hardware_concurrency());
  sweep_ov.attach(sweep_cmd);
  sweep_cmd->add_option("--trace", sweep_trace, "Trace file ('-' for stdin)")->required();
  sweep_cmd->add_option("--mode", sweep_mode, "Mode of every sweep point");
  sweep_cmd
      ->add_option("--param", sweep_param,
                   "fifo_entries | hash_entries | hash_cache_bytes | addr_cache_bytes | type_cache_bytes | "
                   "mask_cache_bytes | l2_bytes | assoc")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep_cmd->add_option("--jobs", sweep_jobs, "Sweep points run concurrently");
  sweep_cmd->add_option("--out", sweep_out, "Output file (default stdout)");

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "Check simulator output against the oracle");
  Overrides ver_ov;
  std::string ver_trace, ver_mode = "all";
  bool ver_unbounded = false;
  ver_ov.attach(ver_cmd);
  ver_cmd->add_option("--trace", ver_trace, "Trace file ('-' for stdin)")->required();
  ver_cmd->add_option("--mode", ver_mode, "A mode, or 'all'");
  ver_cmd->add_flag("--unbounded", ver_unbounded,
                    "Unbounded hash store and metadata caches; also compare per-writeback classification");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (!gen_config.empty()) config_from_json(Overrides::read_file(gen_config), SimConfig::full_system(), &gp);
      if (g_seed) gp.seed = *g_seed;
      if (g_blocks) gp.n_blocks = *g_blocks;
      if (g_records) gp.n_records = *g_records;
      if (g_wf) gp.write_fraction = *g_wf;
      if (g_intra) gp.intra_prob = *g_intra;
      if (g_pool) gp.inter_pool_size = *g_pool;
      if (g_ro_set) gp.readonly_set_size = *g_ro_set;
      if (g_ro_rereads) gp.readonly_rereads = *g_ro_rereads;
      if (g_mask) std::copy(g_mask->begin(), g_mask->end(), gp.mask_distribution.begin());
      auto trace = generate_trace(gp);
      std::string text = "# cmdsim gen " + to_json(gp) + "\n" + format_trace(trace);
      write_output(gen_out, text);
      return 0;
    }

    if (*run_cmd) {
      SimConfig c = run_ov.resolve();
      auto trace = load_trace(run_trace);
      auto report = run(trace, c, mode_or_throw(run_mode));
      write_output(run_out, emit(report, format_or_throw(run_report)));
      return 0;
    }

    if (*cmp_cmd) {
      SimConfig c = cmp_ov.resolve();
      auto trace = load_trace(cmp_trace);
      auto cmp = compare(trace, c, kAllModes);
      write_output(cmp_out, emit(cmp, format_or_throw(cmp_report)));
      return 0;
    }

    if (*sweep_cmd) {
      SimConfig c = sweep_ov.resolve();
      Mode mode = mode_or_throw(sweep_mode);
      auto trace = load_trace(sweep_trace);
      auto values = parse_values(sweep_values);
      std::vector<SimConfig> points;
      for (auto v : values) {
        SimConfig p = c;
        apply_param(p, sweep_param, v);
        points.push_back(p);
      }
      TrafficReport base = run(trace, c, Mode::Baseline);
      std::vector<TrafficReport> results(points.size());
      for (std::size_t first = 0; first < points.size(); first += sweep_jobs) {
        std::vector<std::future<TrafficReport>> batch;
        for (std::size_t i = first; i < std::min(points.size(), first + sweep_jobs); ++i) {
          batch.push_back(std::async(std::launch::async, [&, i] { return run(trace, points[i], mode); }));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) results[first + k] = batch[k].get();
      }
      std::string csv =
          "param,value,mode,offchip_total,write,data_read,read_only,metadata_read,metadata_write,dedup_read,"
          "car_copy,fifo_hit,dedup_ratio,read_only_reduction_pct,offchip_reduction_pct\n";
      for (std::size_t i = 0; i < values.size(); ++i) csv += sweep_row(sweep_param, values[i], results[i], base);
      write_output(sweep_out, csv);
      return 0;
    }

    if (*ver_cmd) {
      SimConfig c = ver_ov.resolve();
      if (ver_unbounded) {
        c.hash_entries = 0;
        c.metadata.addr_cache = c.metadata.type_cache = c.metadata.mask_cache = 0;
      }
      auto trace = load_trace(ver_trace);
      std::vector<Mode> modes;
      if (ver_mode == "all") {
        modes.assign(std::begin(kAllModes), std::end(kAllModes));
      } else {
        modes.push_back(mode_or_throw(ver_mode));
      }
      VerifyOptions opts;
      opts.check_classification = ver_unbounded;
      VerifyResult r = verify_equivalence(trace, c, modes, opts);
      if (!r.equivalent) {
        std::cout << "divergence: " << r.divergence << "\n";
        return 1;
      }
      std::cout << "equivalent\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "cmdsim: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

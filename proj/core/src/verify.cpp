#include "cmdsim/verify.hpp"

#include <map>
#include <sstream>

#include "cmdsim/oracle.hpp"
#include "cmdsim/simulator.hpp"

namespace cmdsim {

namespace {

std::string sector_hex(const SectorData& d) {
  std::ostringstream os;
  os << std::hex;
  for (Word w : d) os << ' ' << w;
  return os.str();
}

oracle::Kind expected_kind(WriteClass cls) {
  switch (cls) {
    case WriteClass::Intra: return oracle::Kind::Intra;
    case WriteClass::Inter: return oracle::Kind::Inter;
    default: return oracle::Kind::Unique;
  }
}

struct Expected {
  oracle::ReplayResult replay;
  std::map<std::pair<std::uint64_t, unsigned>, SectorData> sectors;
};

Expected expect(std::span<const TraceRecord> trace, const SimConfig& config) {
  TraceVerdict verdict = validate_trace(trace);
  if (!verdict.valid) throw TraceViolation(verdict.first_violation, verdict.reason);
  Expected e{oracle::oracle_replay(trace, config.seed), {}};
  e.sectors = oracle::oracle_read_all(e.replay, resolve_n_blocks(config, trace), config.seed);
  return e;
}

VerifyResult verify_one(std::span<const TraceRecord> trace, const SimConfig& config, Mode mode,
                        const VerifyOptions& options, const Expected& exp) {
  VerifyResult res;
  auto diverge = [&](const std::string& what) {
    res.equivalent = false;
    res.divergence = std::string(to_string(mode)) + ": " + what;
    return res;
  };

  SimConfig resolved = config;
  resolved.n_blocks = resolve_n_blocks(config, trace);
  Simulator sim(resolved, mode, resolved.n_blocks);
  sim.set_recording(true);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    try {
      sim.step(trace[i]);
    } catch (const TraceViolation& e) {
      throw TraceViolation(i, e.what());
    }
    if (options.invariant_interval && (i + 1) % options.invariant_interval == 0) sim.check_invariants();
  }

  const oracle::ReplayResult& want = exp.replay;
  std::size_t read_no = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!trace[i].is_read()) continue;
    if (sim.read_log()[read_no] != want.reads[read_no]) {
      return diverge("record " + std::to_string(i + 1) + " (" + format_record(trace[i]) + ") returned" +
                     sector_hex(sim.read_log()[read_no]) + ", expected" + sector_hex(want.reads[read_no]));
    }
    ++read_no;
    ++res.reads_checked;
  }

  const auto& expected = exp.sectors;
  if (options.pipeline_readback) {
    for (const auto& [where, data] : expected) {
      SectorData got = sim.read(BlockAddr{where.first}, where.second);
      if (got != data) {
        return diverge("read-back of block " + std::to_string(where.first) + " sector " +
                       std::to_string(where.second) + " returned" + sector_hex(got) + ", expected" + sector_hex(data));
      }
    }
  }

  sim.flush();
  sim.check_invariants();
  for (const auto& [where, data] : expected) {
    SectorData got = sim.stored_sector(BlockAddr{where.first}, where.second);
    if (got != data) {
      return diverge("memory holds" + sector_hex(got) + " for block " + std::to_string(where.first) + " sector " +
                     std::to_string(where.second) + ", expected" + sector_hex(data));
    }
    ++res.sectors_checked;
  }

  if (options.check_classification && mode != Mode::Baseline) {
    // Each partition is its own dedup domain: replay its writebacks alone.
    const std::uint32_t parts = resolved.cache.n_partitions;
    const auto& log = sim.writeback_log();
    std::vector<std::vector<TraceRecord>> streams(parts);
    std::vector<std::vector<std::size_t>> positions(parts);
    for (std::size_t i = 0; i < log.size(); ++i) {
      const auto p = static_cast<std::size_t>(log[i].request.blk.value % parts);
      streams[p].push_back(TraceRecord::write(log[i].request.blk, log[i].request.mask, log[i].request.payload));
      positions[p].push_back(i);
    }
    std::vector<oracle::Kind> want_kind(log.size());
    for (std::uint32_t p = 0; p < parts; ++p) {
      const oracle::ReplayResult classes = oracle::oracle_replay(streams[p], resolved.seed);
      for (std::size_t k = 0; k < positions[p].size(); ++k) want_kind[positions[p][k]] = classes.writes[k].kind;
    }
    for (std::size_t i = 0; i < log.size(); ++i) {
      oracle::Kind got = expected_kind(log[i].outcome.cls);
      if (got != want_kind[i]) {
        return diverge("writeback " + std::to_string(i + 1) + " (" +
                       format_record(TraceRecord::write(log[i].request.blk, log[i].request.mask,
                                                        log[i].request.payload)) +
                       ") classified " + oracle::to_string(got) + ", oracle says " + oracle::to_string(want_kind[i]));
      }
      ++res.writebacks_classified;
    }
  }
  return res;
}

}  // namespace

VerifyResult verify_equivalence(std::span<const TraceRecord> trace, const SimConfig& config, Mode mode,
                                const VerifyOptions& options) {
  return verify_one(trace, config, mode, options, expect(trace, config));
}

VerifyResult verify_equivalence(std::span<const TraceRecord> trace, const SimConfig& config,
                                std::span<const Mode> modes, const VerifyOptions& options) {
  const Expected exp = expect(trace, config);
  VerifyResult total;
  for (Mode m : modes) {
    VerifyResult r = verify_one(trace, config, m, options, exp);
    if (!r.equivalent) return r;
    total.reads_checked += r.reads_checked;
    total.sectors_checked += r.sectors_checked;
    total.writebacks_classified += r.writebacks_classified;
  }
  return total;
}

}  // namespace cmdsim

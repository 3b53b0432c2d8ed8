#include "cmdsim/config.hpp"

#include <stdexcept>

#include "json.hpp"

namespace cmdsim {

using ojson = nlohmann::ordered_json;

SimConfig SimConfig::full_system() {
  SimConfig c;
  c.cache.n_partitions = 8;
  return c;
}

void SimConfig::validate() const {
  cache.validate();
  metadata.validate();
  cost.validate();
  if (n_blocks > (std::uint64_t{1} << 32)) throw std::invalid_argument("SimConfig: n_blocks exceeds 2^32");
}

namespace {

ojson config_ojson(const SimConfig& c) {
  ojson j;
  j["cache"] = ojson{{"capacity_bytes", c.cache.capacity_bytes},
                     {"line_bytes", c.cache.line_bytes},
                     {"sectors_per_line", c.cache.sectors_per_line},
                     {"associativity", c.cache.associativity},
                     {"n_partitions", c.cache.n_partitions},
                     {"fifo_entries_per_partition", c.cache.fifo_entries_per_partition}};
  j["metadata"] = ojson{{"addr_cache", c.metadata.addr_cache},
                        {"type_cache", c.metadata.type_cache},
                        {"mask_cache", c.metadata.mask_cache},
                        {"line_bytes", c.metadata.line_bytes},
                        {"hit_latency", c.metadata.hit_latency}};
  j["hash_store"] = ojson{{"entries", c.hash_entries}};
  const auto& k = c.cost;
  j["cost"] = ojson{{"dram_read", k.dram_read},
                    {"dram_write", k.dram_write},
                    {"metadata_cache_hit", k.metadata_cache_hit},
                    {"fingerprint", k.fingerprint},
                    {"l2_hit", k.l2_hit},
                    {"fifo_hit", k.fifo_hit},
                    {"energy_dram_read", k.energy_dram_read},
                    {"energy_dram_write", k.energy_dram_write},
                    {"energy_metadata_hit", k.energy_metadata_hit},
                    {"energy_fingerprint", k.energy_fingerprint},
                    {"energy_l2_access", k.energy_l2_access},
                    {"energy_fifo_hit", k.energy_fifo_hit}};
  j["n_blocks"] = c.n_blocks;
  j["seed"] = c.seed;
  j["flush_at_end"] = c.flush_at_end;
  return j;
}

template <typename T>
void take(const ojson& obj, const char* key, T& field, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    field = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: bad value for " + where + "." + key + ": " + e.what());
  }
}

void reject_unknown(const ojson& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok |= key == k;
    if (!ok) throw std::invalid_argument("config: unknown key " + where + "." + key);
  }
}

}  // namespace

std::string to_json(const SimConfig& config, bool pretty) {
  return pretty ? config_ojson(config).dump(2) : config_ojson(config).dump();
}

std::string to_json(const GenParams& p) {
  ojson j{{"seed", p.seed},
          {"n_blocks", p.n_blocks},
          {"n_records", p.n_records},
          {"write_fraction", p.write_fraction},
          {"intra_prob", p.intra_prob},
          {"inter_pool_size", p.inter_pool_size},
          {"readonly_set_size", p.readonly_set_size},
          {"readonly_rereads", p.readonly_rereads},
          {"mask_distribution", p.mask_distribution}};
  return j.dump();
}

SimConfig config_from_json(std::string_view text, SimConfig c, GenParams* gen) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  reject_unknown(j, {"cache", "metadata", "hash_store", "cost", "n_blocks", "seed", "flush_at_end", "gen"}, "root");
  if (j.contains("cache")) {
    const auto& o = j["cache"];
    reject_unknown(o,
                   {"capacity_bytes", "line_bytes", "sectors_per_line", "associativity", "n_partitions",
                    "fifo_entries_per_partition"},
                   "cache");
    take(o, "capacity_bytes", c.cache.capacity_bytes, "cache");
    take(o, "line_bytes", c.cache.line_bytes, "cache");
    take(o, "sectors_per_line", c.cache.sectors_per_line, "cache");
    take(o, "associativity", c.cache.associativity, "cache");
    take(o, "n_partitions", c.cache.n_partitions, "cache");
    take(o, "fifo_entries_per_partition", c.cache.fifo_entries_per_partition, "cache");
  }
  if (j.contains("metadata")) {
    const auto& o = j["metadata"];
    reject_unknown(o, {"addr_cache", "type_cache", "mask_cache", "line_bytes", "hit_latency"}, "metadata");
    take(o, "addr_cache", c.metadata.addr_cache, "metadata");
    take(o, "type_cache", c.metadata.type_cache, "metadata");
    take(o, "mask_cache", c.metadata.mask_cache, "metadata");
    take(o, "line_bytes", c.metadata.line_bytes, "metadata");
    take(o, "hit_latency", c.metadata.hit_latency, "metadata");
  }
  if (j.contains("hash_store")) {
    const auto& o = j["hash_store"];
    reject_unknown(o, {"entries"}, "hash_store");
    take(o, "entries", c.hash_entries, "hash_store");
  }
  if (j.contains("cost")) {
    const auto& o = j["cost"];
    auto& k = c.cost;
    reject_unknown(o,
                   {"dram_read", "dram_write", "metadata_cache_hit", "fingerprint", "l2_hit", "fifo_hit",
                    "energy_dram_read", "energy_dram_write", "energy_metadata_hit", "energy_fingerprint",
                    "energy_l2_access", "energy_fifo_hit"},
                   "cost");
    take(o, "dram_read", k.dram_read, "cost");
    take(o, "dram_write", k.dram_write, "cost");
    take(o, "metadata_cache_hit", k.metadata_cache_hit, "cost");
    take(o, "fingerprint", k.fingerprint, "cost");
    take(o, "l2_hit", k.l2_hit, "cost");
    take(o, "fifo_hit", k.fifo_hit, "cost");
    take(o, "energy_dram_read", k.energy_dram_read, "cost");
    take(o, "energy_dram_write", k.energy_dram_write, "cost");
    take(o, "energy_metadata_hit", k.energy_metadata_hit, "cost");
    take(o, "energy_fingerprint", k.energy_fingerprint, "cost");
    take(o, "energy_l2_access", k.energy_l2_access, "cost");
    take(o, "energy_fifo_hit", k.energy_fifo_hit, "cost");
  }
  take(j, "n_blocks", c.n_blocks, "root");
  take(j, "seed", c.seed, "root");
  take(j, "flush_at_end", c.flush_at_end, "root");
  if (j.contains("gen")) {
    const auto& o = j["gen"];
    reject_unknown(o,
                   {"seed", "n_blocks", "n_records", "write_fraction", "intra_prob", "inter_pool_size",
                    "readonly_set_size", "readonly_rereads", "mask_distribution"},
                   "gen");
    if (gen) {
      take(o, "seed", gen->seed, "gen");
      take(o, "n_blocks", gen->n_blocks, "gen");
      take(o, "n_records", gen->n_records, "gen");
      take(o, "write_fraction", gen->write_fraction, "gen");
      take(o, "intra_prob", gen->intra_prob, "gen");
      take(o, "inter_pool_size", gen->inter_pool_size, "gen");
      take(o, "readonly_set_size", gen->readonly_set_size, "gen");
      take(o, "readonly_rereads", gen->readonly_rereads, "gen");
      take(o, "mask_distribution", gen->mask_distribution, "gen");
    }
  }
  c.validate();
  return c;
}

}  // namespace cmdsim

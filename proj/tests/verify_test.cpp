#include <gtest/gtest.h>

#include "cmdsim/controller.hpp"
#include "cmdsim/generator.hpp"
#include "cmdsim/verify.hpp"
#include "helpers.hpp"

using namespace cmdsim;
using namespace cmdsim::test;

TEST(Verify, GeneratedTracesAreEquivalentInEveryMode) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GenParams p;
    p.seed = seed;
    p.n_blocks = 96;
    p.n_records = 3000;
    p.inter_pool_size = 6;
    p.readonly_set_size = 8;
    p.readonly_rereads = 2;
    p.mask_distribution = {0.25, 0.25, 0.25, 0.25};
    auto t = generate_trace(p);
    SimConfig cfg = tiny_config(4);
    cfg.cache.capacity_bytes = 2048;
    cfg.cache.n_partitions = 2;
    cfg.cache.associativity = 4;
    VerifyOptions opts;
    opts.check_classification = true;
    opts.invariant_interval = 250;
    auto r = verify_equivalence(t, cfg, kAllModes, opts);
    EXPECT_TRUE(r.equivalent) << r.divergence;
    EXPECT_GT(r.writebacks_classified, 0u);
    EXPECT_GT(r.reads_checked, 0u);
  }
}

TEST(Verify, IllFormedTraceThrows) {
  std::vector<TraceRecord> t{W(0, "1000", ramp_payload(mask("1000"), 1)), R(0, 2)};
  EXPECT_THROW(verify_equivalence(t, tiny_config(), Mode::Cmd), TraceViolation);
}

#pragma once

#include "shard_sched/engine.hpp"

#include <array>

namespace shard_sched {

/// The four-transaction example: shards a, b, c, d hold one account each;
/// T1 (home a) accesses a, b; T2 (home c) a, d; T3 (home c) b, c; T4 (home d) c, d.
/// Ids 1..4, all injected at round t.
InjectionTrace example_trace(std::uint32_t shards, std::array<ShardId, 4> abcd, Round t);

struct ExampleTxnResult {
    TxnId id = 0;
    std::uint32_t color = 0;          // BDS color, or FDS height color
    std::optional<Round> queued;      // FDS: reached destination queues
    std::optional<Round> committed;
    std::uint32_t d = 0;              // FDS: home cluster diameter
    ClusterRef cluster;               // FDS: home cluster
    ShardId leader;
};

struct ExampleResult {
    Round t = 0;
    std::array<ExampleTxnResult, 4> txns;
};

/// BDS on 4 uniform shards, injection at round 1 (the epoch starts at round 2).
ExampleResult run_bds_example();

/// FDS on an 8-shard line with a, b, c, d = S2, S4, S5, S6, injection at round 95
/// so that the next epoch of every layer starts at round 96.
ExampleResult run_fds_example();

}  // namespace shard_sched

#pragma once

#include "shard_sched/bds.hpp"
#include "shard_sched/config.hpp"
#include "shard_sched/fds.hpp"
#include "shard_sched/metrics.hpp"

namespace shard_sched {

struct RunResult {
    MetricsTrace metrics;
    /// Committed transactions in the scheduler's serialization order; every
    /// ledger must be a subsequence of it.
    std::vector<TxnId> serialization;
    StabilityReport stability;
    GrowthResult growth;
};

Topology make_topology(const RunConfig& config);
/// Generated from the adversary settings, or read from config.trace.
InjectionTrace make_trace(const RunConfig& config);

/// Validates the config and runs `config.rounds` rounds. Each round: the
/// scheduler step, then that round's injections, then the metrics sample.
/// Throws ConfigError for bad settings and std::logic_error on protocol bugs.
RunResult run(const RunConfig& config);
RunResult run_trace(const RunConfig& config, const InjectionTrace& trace);

struct CheckResult {
    bool ok = true;
    std::string first_failure;
};

/// Committed: on every destination ledger exactly once, at the commit round.
/// Aborted or unfinished: on none. No ledger holds anything else.
CheckResult check_atomicity(const MetricsTrace& trace);
/// Every ledger is a subsequence of `order`.
CheckResult check_ledger_order(const MetricsTrace& trace, std::span<const TxnId> order);
/// Brute force: every pair of transactions shared by two ledgers appears in the same order in both.
CheckResult check_pairwise_consistency(const MetricsTrace& trace);

struct SweepPoint {
    Rational rho;
    std::int64_t b = 0;
    Summary summary;
    GrowthResult growth;
};

/// One run per (rho, b) pair, b-major; results come back in that order
/// regardless of `threads`.
std::vector<SweepPoint> sweep(const RunConfig& base, std::span<const Rational> rhos, std::span<const std::int64_t> bs,
                              unsigned threads);

}  // namespace shard_sched

#pragma once

#include "shard_sched/core.hpp"

namespace shard_sched {

/// State after all sub-steps of one round. pending_total excludes in-flight
/// transactions, so injected = committed + aborted + pending + in_flight.
struct RoundSample {
    Round round = 0;
    std::uint64_t pending_total = 0;
    std::uint64_t in_flight = 0;
    std::uint64_t committed_cum = 0;
    std::uint64_t aborted_cum = 0;

    std::uint64_t unfinished() const { return pending_total + in_flight; }
    bool operator==(const RoundSample&) const = default;
};

struct TxnRecord {
    TxnId id = 0;
    ShardId home;
    std::vector<ShardId> destinations;
    Round injection_round = 0;
    TxnStatus status = TxnStatus::pending;
    std::optional<Round> finish_round;

    std::optional<Round> latency() const {
        if (!finish_round) return std::nullopt;
        return *finish_round - injection_round;
    }
};

/// One BDS epoch.
struct EpochRecord {
    Round start = 0;
    Round length = 0;
    std::uint32_t colors = 0;
    std::uint32_t transactions = 0;
    ShardId leader;
};

struct MetricsTrace {
    std::uint32_t shards = 0;
    std::vector<RoundSample> rounds;
    /// Unfinished transactions per home shard, [round][shard].
    std::vector<std::vector<std::uint32_t>> shard_queue;
    std::vector<TxnRecord> txns;  // injection order
    std::vector<EpochRecord> epochs;
    std::vector<Ledger> ledgers;
};

struct GrowthResult {
    bool growing = false;
    double slope = 0.0;
    double r2 = 0.0;
};

/// Least-squares fit of `series` against its index over the second half.
/// growing iff slope > slope_threshold and R^2 > r2_threshold.
GrowthResult detect_growth(std::span<const double> series, double slope_threshold = 0.01,
                           double r2_threshold = 0.9);
/// Same, on the unfinished-transaction count per round.
GrowthResult detect_growth(const MetricsTrace& trace, double slope_threshold = 0.01, double r2_threshold = 0.9);

struct Summary {
    std::uint64_t injected = 0;
    std::uint64_t committed = 0;
    std::uint64_t aborted = 0;
    std::uint64_t unfinished_at_end = 0;
    double avg_pending = 0.0;  // mean unfinished count per round
    std::uint64_t max_pending = 0;
    double avg_latency = 0.0;  // over finished transactions
    Round max_latency = 0;
    std::vector<double> avg_shard_queue;
    std::vector<std::uint32_t> max_shard_queue;
};

Summary summarize(const MetricsTrace& trace);

/// Outcome of a bound check. When the precondition fails, the observed maxima
/// are still reported but nothing is asserted.
struct StabilityReport {
    bool precondition = false;
    bool ok = true;
    std::uint64_t violation_count = 0;
    std::string first_violation;
    std::uint64_t pending_limit = 0;
    std::uint64_t max_pending = 0;
    Round latency_limit = 0;
    Round max_latency = 0;  // includes the age of unfinished transactions at the end
    Round epoch_limit = 0;
    Round max_epoch_length = 0;

    void violate(std::string what);
};

}  // namespace shard_sched

#pragma once

#include "shard_sched/adversary.hpp"
#include "shard_sched/coloring.hpp"
#include "shard_sched/metrics.hpp"
#include "shard_sched/topology.hpp"
#include "shard_sched/world.hpp"

#include <set>
#include <unordered_map>

namespace shard_sched {

/// Position in a destination queue. Lexicographic; txn breaks the remaining ties.
struct Height {
    Round t_end = 0;
    std::uint32_t layer = 0;
    std::uint32_t sublayer = 0;
    std::uint32_t color = 0;
    TxnId txn = 0;

    auto operator<=>(const Height&) const = default;
};

/// E0 = c * max(1, ceil(log2 s)); E_i = P_i = 2^i * E0, all aligned to round 0.
struct EpochClock {
    Round e0 = 1;

    static EpochClock make(std::uint32_t shards, std::uint32_t c);
    Round epoch(std::uint32_t layer) const { return e0 << layer; }
    Round period(std::uint32_t k) const { return e0 << k; }
    bool epoch_starts(std::uint32_t layer, Round r) const { return r % epoch(layer) == 0; }
    /// True when a level-`layer` epoch ending at t_end also ends a period P_k with k > layer.
    bool reschedules(std::uint32_t layer, Round t_end) const { return t_end % (2 * epoch(layer)) == 0; }
};

/// max(1, ceil(log2 s)).
std::uint32_t log2_ceil_at_least_1(std::uint32_t s);

struct FdsOptions {
    std::uint32_t c = 4;
    ColoringStrategy coloring = ColoringStrategy::greedy;
};

struct FdsTxnInfo {
    ClusterRef cluster;
    ShardId leader;
    std::uint32_t d = 0;  // diameter of the home cluster
    std::optional<Height> height;
    std::optional<Round> queued_round;  // first insertion into destination queues
    std::optional<Round> lock_round;    // first vote
    std::uint64_t lock_seq = 0;
    std::optional<Round> decision_round;
    std::optional<Round> finalize_round;
    bool commit = true;
};

struct RecolorEvent {
    Round round = 0;
    ClusterRef cluster;
    Round t_end = 0;
    std::uint32_t recolored = 0;  // previously scheduled transactions given new heights
};

/// Fully distributed scheduler over a cluster hierarchy.
///
/// Round sub-order: deliver, scheduling phases, commit steps; injections
/// follow in the engine. A level-i epoch starts at every multiple t of E_i:
/// home shards ship the level's new transactions to the cluster leader (t),
/// the leader colors them at t + d and the destinations queue them at t + 2d.
/// If the epoch end also ends a longer period, unlocked transactions still in
/// the leader's schedule are recolored together with the new ones.
///
/// Destination queues are ordered by (locked first, lock sequence, height).
/// A shard votes for its head once; the first vote locks the transaction
/// everywhere. The leader decides d rounds after the last vote and every
/// destination finalizes d + 1 rounds after the decision.
class FdsScheduler : public Scheduler {
public:
    /// Throws std::invalid_argument when some epoch E_i is shorter than two
    /// diameters of its layer's clusters.
    FdsScheduler(World& world, const Topology& topology, const ClusterHierarchy& hierarchy, FdsOptions options = {});

    void step(Round r) override;
    void inject(TxnId id) override;
    std::size_t in_flight() const override { return in_flight_; }

    const EpochClock& clock() const { return clock_; }
    const FdsTxnInfo& info(TxnId id) const;
    /// Transactions in the order their first vote was cast; ledgers follow it.
    std::span<const TxnId> lock_order() const { return lock_order_; }
    /// Destination queue of `shard`, head first.
    std::vector<TxnId> queue(ShardId shard) const;
    std::span<const RecolorEvent> recolorings() const { return recolorings_; }

private:
    struct Key {
        std::uint8_t cls = 1;  // 0 locked, 1 not yet
        std::uint64_t seq = 0;
        Height height;

        auto operator<=>(const Key&) const = default;
    };
    struct TxnState {
        FdsTxnInfo info;
        std::uint32_t flat = 0;
        std::vector<ShardId> shards;
        std::uint32_t votes_sent = 0;
        std::uint32_t votes_received = 0;
        Round last_vote = 0;
        bool in_queues = false;
        bool finished = false;
    };
    struct ColorJob {
        std::uint32_t flat = 0;
        Round start = 0;
        Round t_end = 0;
    };

    Key key_of(const TxnState& st) const;
    void drain(Round r);
    void phase_ship(Round r);
    void phase_color(Round r);
    void phase_apply(Round r);
    void commit_finalize(Round r);
    void commit_vote(Round r);
    void commit_decide(Round r);
    TxnState& state(TxnId id);

    World& world_;
    const Topology& topology_;
    const ClusterHierarchy& hierarchy_;
    FdsOptions options_;
    EpochClock clock_;
    Transport transport_;
    std::vector<const Cluster*> clusters_;  // by flat index
    std::vector<std::vector<TxnId>> buffer_;  // new transactions waiting at their home shards
    std::vector<std::vector<TxnId>> inbox_;   // arrived at the leader
    std::vector<std::set<TxnId>> sch_ldr_;
    std::map<Round, std::vector<ColorJob>> color_jobs_;
    std::map<Round, std::vector<Message>> applies_;
    std::map<Round, std::vector<TxnId>> decisions_;
    std::map<Round, std::vector<TxnId>> finalizes_;
    std::vector<std::set<Key>> queues_;
    std::vector<std::optional<TxnId>> busy_;
    std::unordered_map<TxnId, TxnState> txns_;
    std::vector<TxnId> lock_order_;
    std::vector<RecolorEvent> recolorings_;
    std::size_t in_flight_ = 0;
};

/// When rho <= max(1/k, 1/sqrt(s)) / (c1 d log^2 s): unfinished count <= 4bs
/// every round and latency <= 2 c1 b d log^2 s min(k, ceil(sqrt s)), with
/// log s = max(1, ceil(log2 s)) and d at least 1. The window check (at most
/// 2bs injections in every aligned window of P_k, for each k < layers with
/// rho * P_k <= b) is asserted regardless and counted in the same report.
StabilityReport fds_check_stability(const MetricsTrace& trace, Rational rho, std::int64_t b, std::uint32_t k,
                                    std::uint32_t s, std::uint32_t d, double c1, const EpochClock& clock,
                                    std::uint32_t layers);

/// Window counts behind fds_check_stability: the first aligned P_k window
/// holding more than 2bs injections, if any.
struct WindowViolation {
    std::uint32_t k = 0;
    Round start = 0;
    std::uint64_t count = 0;
};
std::optional<WindowViolation> check_period_windows(const MetricsTrace& trace, Rational rho, std::int64_t b,
                                                    std::uint32_t s, const EpochClock& clock, std::uint32_t layers);

}  // namespace shard_sched

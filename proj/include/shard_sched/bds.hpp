#pragma once

#include "shard_sched/adversary.hpp"
#include "shard_sched/coloring.hpp"
#include "shard_sched/metrics.hpp"
#include "shard_sched/world.hpp"

#include <unordered_map>

namespace shard_sched {

struct BdsOptions {
    bool retry_aborts = false;
    ColoringStrategy coloring = ColoringStrategy::greedy;
};

/// Epoch scheduler for the uniform model. An epoch starting at round e takes
/// every transaction injected before e: round e ships them to the leader,
/// e+1 colors them, then color c (0-based) splits at e+2+4c, votes at e+3+4c,
/// confirms at e+4+4c and commits or aborts at e+5+4c. The next epoch starts
/// at e + 2 + 4 * colors.
class BdsScheduler : public Scheduler {
public:
    /// Throws std::invalid_argument for a non-uniform topology.
    BdsScheduler(World& world, const Topology& topology, BdsOptions options = {});

    void step(Round r) override;
    void inject(TxnId id) override;
    std::size_t in_flight() const override { return in_flight_; }

    std::span<const EpochRecord> epochs() const { return epochs_; }
    /// Color in the epoch that last processed `id`.
    std::optional<std::uint32_t> color_of(TxnId id) const;

private:
    void start_epoch(Round r);

    World& world_;
    std::uint32_t shards_;
    BdsOptions options_;
    std::vector<TxnId> buffer_;
    bool active_ = false;
    Round epoch_start_ = 0;
    Round epoch_end_ = 0;  // exclusive
    std::vector<std::vector<TxnId>> by_color_;
    std::unordered_map<TxnId, std::uint32_t> color_;
    std::vector<EpochRecord> epochs_;
    std::size_t in_flight_ = 0;
};

/// Maximum epoch length 18 * b * min(k, ceil(sqrt(s))).
Round bds_epoch_length_bound(std::int64_t b, std::uint32_t k, std::uint32_t s);

/// Asserts, when rho <= max(1/(18k), 1/(18 ceil(sqrt s))): unfinished count
/// <= 4bs every round, latency <= 36 b min(k, ceil(sqrt s)) (unfinished
/// transactions count with their age at the last round), and every epoch no
/// longer than bds_epoch_length_bound.
StabilityReport bds_check_stability(const MetricsTrace& trace, Rational rho, std::int64_t b, std::uint32_t k,
                                    std::uint32_t s);

}  // namespace shard_sched

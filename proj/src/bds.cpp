#include "shard_sched/bds.hpp"

#include <algorithm>

namespace shard_sched {

BdsScheduler::BdsScheduler(World& world, const Topology& topology, BdsOptions options)
    : world_(world), shards_(topology.shards()), options_(options) {
    if (!topology.is_uniform()) throw std::invalid_argument("the BDS scheduler needs a uniform topology");
    if (topology.shards() != world.shards()) throw std::invalid_argument("topology and world disagree on s");
}

void BdsScheduler::inject(TxnId id) { buffer_.push_back(id); }

std::optional<std::uint32_t> BdsScheduler::color_of(TxnId id) const {
    auto it = color_.find(id);
    if (it == color_.end()) return std::nullopt;
    return it->second;
}

void BdsScheduler::start_epoch(Round r) {
    std::vector<TxnId> batch;
    batch.swap(buffer_);
    std::sort(batch.begin(), batch.end());
    std::vector<const Transaction*> txns;
    txns.reserve(batch.size());
    for (auto id : batch) txns.push_back(&world_.txn(id));
    const auto colors = color_transactions(txns, options_.coloring, shards_);

    std::uint32_t num_colors = 0;
    for (auto c : colors) num_colors = std::max(num_colors, c + 1);
    by_color_.assign(num_colors, {});
    for (std::size_t i = 0; i < batch.size(); ++i) {
        by_color_[colors[i]].push_back(batch[i]);
        color_[batch[i]] = colors[i];
        world_.txn(batch[i]).status = TxnStatus::scheduled;
    }

    EpochRecord rec;
    rec.start = r;
    rec.length = 2 + 4 * static_cast<Round>(num_colors);
    rec.colors = num_colors;
    rec.transactions = static_cast<std::uint32_t>(batch.size());
    rec.leader = ShardId{static_cast<std::uint32_t>(epochs_.size() % shards_)};
    epochs_.push_back(rec);

    active_ = true;
    epoch_start_ = r;
    epoch_end_ = r + rec.length;
}

void BdsScheduler::step(Round r) {
    if (!active_ || r >= epoch_end_) start_epoch(r);
    const Round rel = r - epoch_start_;
    if (rel < 2) return;
    const auto c = static_cast<std::size_t>((rel - 2) / 4);
    const auto sub = (rel - 2) % 4;
    auto& group = by_color_[c];
    if (sub == 0) {
        in_flight_ += group.size();
    } else if (sub == 3) {
        for (auto id : group) {
            const auto& t = world_.txn(id);
            bool ok = true;
            for (auto s : t.shards()) ok = world_.vote(id, s) && ok;
            if (ok) {
                world_.commit(id, r);
            } else {
                world_.abort(id, r);
                if (options_.retry_aborts) {
                    world_.retry(id);
                    buffer_.push_back(id);
                }
            }
        }
        in_flight_ -= group.size();
    }
}

Round bds_epoch_length_bound(std::int64_t b, std::uint32_t k, std::uint32_t s) {
    return 18 * b * std::min<std::int64_t>(k, ceil_sqrt(s));
}

StabilityReport bds_check_stability(const MetricsTrace& trace, Rational rho, std::int64_t b, std::uint32_t k,
                                    std::uint32_t s) {
    StabilityReport rep;
    const std::int64_t m = std::min<std::int64_t>(k, ceil_sqrt(s));
    rep.precondition = rho <= Rational(1, 18 * static_cast<std::int64_t>(k)) ||
                       rho <= Rational(1, 18 * static_cast<std::int64_t>(ceil_sqrt(s)));
    rep.pending_limit = static_cast<std::uint64_t>(4 * b * s);
    rep.latency_limit = 36 * b * m;
    rep.epoch_limit = bds_epoch_length_bound(b, k, s);

    for (const auto& r : trace.rounds) {
        rep.max_pending = std::max(rep.max_pending, r.unfinished());
        if (r.unfinished() > rep.pending_limit) {
            rep.violate("round " + std::to_string(r.round) + ": " + std::to_string(r.unfinished()) +
                        " pending > " + std::to_string(rep.pending_limit));
        }
    }
    const Round last = trace.rounds.empty() ? 0 : trace.rounds.back().round;
    for (const auto& t : trace.txns) {
        const Round l = t.latency().value_or(last - t.injection_round);
        rep.max_latency = std::max(rep.max_latency, l);
        if (l > rep.latency_limit) {
            rep.violate("txn " + std::to_string(t.id) + ": latency " + std::to_string(l) + " > " +
                        std::to_string(rep.latency_limit));
        }
    }
    for (const auto& e : trace.epochs) {
        rep.max_epoch_length = std::max(rep.max_epoch_length, e.length);
        if (e.length > rep.epoch_limit) {
            rep.violate("epoch at round " + std::to_string(e.start) + ": length " + std::to_string(e.length) +
                        " > " + std::to_string(rep.epoch_limit));
        }
    }
    return rep;
}

}  // namespace shard_sched

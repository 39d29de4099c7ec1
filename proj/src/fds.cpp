#include "shard_sched/fds.hpp"

#include <algorithm>
#include <cmath>

namespace shard_sched {

std::uint32_t log2_ceil_at_least_1(std::uint32_t s) {
    std::uint32_t log = 0;
    while ((std::uint64_t{1} << log) < s) ++log;
    return std::max<std::uint32_t>(log, 1);
}

EpochClock EpochClock::make(std::uint32_t shards, std::uint32_t c) {
    if (c < 1) throw std::invalid_argument("epoch constant c must be >= 1");
    return EpochClock{static_cast<Round>(c) * log2_ceil_at_least_1(shards)};
}

FdsScheduler::FdsScheduler(World& world, const Topology& topology, const ClusterHierarchy& hierarchy,
                           FdsOptions options)
    : world_(world),
      topology_(topology),
      hierarchy_(hierarchy),
      options_(options),
      clock_(EpochClock::make(topology.shards(), options.c)),
      transport_(topology),
      queues_(topology.shards()),
      busy_(topology.shards()) {
    if (hierarchy.shards() != topology.shards() || world.shards() != topology.shards()) {
        throw std::invalid_argument("topology, hierarchy and world disagree on s");
    }
    if (hierarchy.layers() > 40) throw std::invalid_argument("too many layers");
    clusters_.resize(hierarchy.cluster_count());
    for (std::uint32_t l = 0; l < hierarchy.layers(); ++l) {
        for (std::uint32_t j = 0; j < hierarchy.sublayers(l); ++j) {
            for (const auto& c : hierarchy.clusters(l, j)) {
                clusters_[hierarchy.flat_index(c.ref)] = &c;
                if (c.leader && 2 * static_cast<Round>(c.diameter) > clock_.epoch(l)) {
                    throw std::invalid_argument("epoch constant c = " + std::to_string(options.c) +
                                                " is too small: layer " + std::to_string(l) + " epoch of " +
                                                std::to_string(clock_.epoch(l)) + " rounds < 2 * diameter " +
                                                std::to_string(c.diameter));
                }
            }
        }
    }
    buffer_.resize(clusters_.size());
    inbox_.resize(clusters_.size());
    sch_ldr_.resize(clusters_.size());
}

FdsScheduler::TxnState& FdsScheduler::state(TxnId id) {
    auto it = txns_.find(id);
    if (it == txns_.end()) throw std::logic_error("protocol message for unknown txn " + std::to_string(id));
    return it->second;
}

const FdsTxnInfo& FdsScheduler::info(TxnId id) const {
    auto it = txns_.find(id);
    if (it == txns_.end()) throw std::invalid_argument("unknown txn " + std::to_string(id));
    return it->second.info;
}

std::vector<TxnId> FdsScheduler::queue(ShardId shard) const {
    std::vector<TxnId> out;
    for (const auto& k : queues_.at(shard.index)) out.push_back(k.height.txn);
    return out;
}

FdsScheduler::Key FdsScheduler::key_of(const TxnState& st) const {
    Key k;
    if (st.info.lock_round) {
        k.cls = 0;
        k.seq = st.info.lock_seq;
    }
    k.height = *st.info.height;
    return k;
}

void FdsScheduler::inject(TxnId id) {
    const auto& t = world_.txn(id);
    TxnState st;
    st.shards = t.shards();
    const auto ref = home_cluster(t.home, st.shards, hierarchy_, topology_);
    const auto& c = hierarchy_.cluster(ref);
    st.info.cluster = ref;
    st.info.leader = *c.leader;
    st.info.d = c.diameter;
    st.flat = hierarchy_.flat_index(ref);
    buffer_[st.flat].push_back(id);
    if (!txns_.emplace(id, std::move(st)).second) throw std::logic_error("txn injected twice");
}

void FdsScheduler::drain(Round r) {
    for (const auto& m : transport_.deliver(r)) {
        switch (m.kind) {
            case MessageKind::txn_to_leader:
                inbox_[m.cluster].push_back(m.txn);
                break;
            case MessageKind::subtxn:
                if (m.apply_round < r) throw std::logic_error("subtransaction arrived after its apply round");
                applies_[m.apply_round].push_back(m);
                break;
            case MessageKind::vote: {
                auto& st = state(m.txn);
                if (!m.commit) st.info.commit = false;
                if (++st.votes_received == st.shards.size()) {
                    decisions_[st.last_vote + st.info.d].push_back(m.txn);
                }
                break;
            }
            case MessageKind::confirm:
                if (!state(m.txn).info.finalize_round) throw std::logic_error("confirm without a decision");
                break;
            case MessageKind::colored_txn:
                break;
        }
    }
}

void FdsScheduler::phase_ship(Round r) {
    for (std::uint32_t l = 0; l < hierarchy_.layers(); ++l) {
        if (!clock_.epoch_starts(l, r)) continue;
        for (std::uint32_t j = 0; j < hierarchy_.sublayers(l); ++j) {
            for (const auto& c : hierarchy_.clusters(l, j)) {
                if (!c.leader) continue;
                const auto flat = hierarchy_.flat_index(c.ref);
                if (buffer_[flat].empty() && sch_ldr_[flat].empty()) continue;
                for (auto id : buffer_[flat]) {
                    Message m;
                    m.kind = MessageKind::txn_to_leader;
                    m.txn = id;
                    m.src = world_.txn(id).home;
                    m.dst = *c.leader;
                    m.send_round = r;
                    m.cluster = flat;
                    transport_.send(m);
                }
                buffer_[flat].clear();
                color_jobs_[r + c.diameter].push_back(ColorJob{flat, r, r + clock_.epoch(l)});
            }
        }
    }
}

void FdsScheduler::phase_color(Round r) {
    auto node = color_jobs_.extract(r);
    if (node.empty()) return;
    for (const auto& job : node.mapped()) {
        const auto& c = *clusters_[job.flat];
        std::vector<TxnId> batch;
        batch.swap(inbox_[job.flat]);
        const bool resched = clock_.reschedules(c.ref.layer, job.t_end);
        std::uint32_t old = 0;
        if (resched) {
            for (auto id : sch_ldr_[job.flat]) {
                if (!state(id).info.lock_round) {
                    batch.push_back(id);
                    ++old;
                }
            }
            recolorings_.push_back(RecolorEvent{r, c.ref, job.t_end, old});
        }
        if (batch.empty()) continue;
        std::sort(batch.begin(), batch.end());
        std::vector<const Transaction*> txns;
        for (auto id : batch) txns.push_back(&world_.txn(id));
        const auto colors = color_transactions(txns, options_.coloring, topology_.shards());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto id = batch[i];
            sch_ldr_[job.flat].insert(id);
            world_.txn(id).status = TxnStatus::scheduled;
            for (auto dest : state(id).shards) {
                Message m;
                m.kind = MessageKind::subtxn;
                m.txn = id;
                m.src = *c.leader;
                m.dst = dest;
                m.send_round = r;
                m.cluster = job.flat;
                m.color = colors[i];
                m.t_end = job.t_end;
                m.apply_round = job.start + 2 * static_cast<Round>(c.diameter);
                transport_.send(m);
            }
        }
    }
}

void FdsScheduler::phase_apply(Round r) {
    auto node = applies_.extract(r);
    if (node.empty()) return;
    // all subtransactions of one transaction share an apply round
    std::map<TxnId, std::vector<const Message*>> by_txn;
    for (const auto& m : node.mapped()) by_txn[m.txn].push_back(&m);
    for (const auto& [id, msgs] : by_txn) {
        auto& st = state(id);
        if (msgs.size() != st.shards.size()) throw std::logic_error("partial subtransaction delivery");
        if (st.info.lock_round || st.finished) continue;
        const auto& c = *clusters_[msgs.front()->cluster];
        const Height h{msgs.front()->t_end, c.ref.layer, c.ref.sublayer, msgs.front()->color, id};
        if (st.in_queues) {
            const auto old = key_of(st);
            for (auto s : st.shards) queues_[s.index].erase(old);
        }
        st.info.height = h;
        if (!st.info.queued_round) st.info.queued_round = r;
        st.in_queues = true;
        const auto k = key_of(st);
        for (auto s : st.shards) queues_[s.index].insert(k);
    }
}

void FdsScheduler::commit_finalize(Round r) {
    auto node = finalizes_.extract(r);
    if (node.empty()) return;
    auto& ids = node.mapped();
    std::sort(ids.begin(), ids.end(), [&](TxnId a, TxnId b) { return state(a).info.lock_seq < state(b).info.lock_seq; });
    for (auto id : ids) {
        auto& st = state(id);
        const auto k = key_of(st);
        for (auto s : st.shards) {
            queues_[s.index].erase(k);
            if (busy_[s.index] != id) throw std::logic_error("finalizing a transaction that is not at the head");
            busy_[s.index].reset();
        }
        if (st.info.commit) {
            world_.commit(id, r);
        } else {
            world_.abort(id, r);
        }
        st.finished = true;
        st.in_queues = false;
        --in_flight_;
    }
}

void FdsScheduler::commit_vote(Round r) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::uint32_t x = 0; x < queues_.size(); ++x) {
            if (busy_[x] || queues_[x].empty()) continue;
            const auto id = queues_[x].begin()->height.txn;
            auto& st = state(id);
            if (!st.info.lock_round) {
                const auto old = key_of(st);
                st.info.lock_round = r;
                st.info.lock_seq = lock_order_.size();
                lock_order_.push_back(id);
                const auto k = key_of(st);
                for (auto s : st.shards) {
                    queues_[s.index].erase(old);
                    queues_[s.index].insert(k);
                }
                ++in_flight_;
            }
            busy_[x] = id;
            ++st.votes_sent;
            st.last_vote = r;
            Message m;
            m.kind = MessageKind::vote;
            m.txn = id;
            m.src = ShardId{x};
            m.dst = st.info.leader;
            m.send_round = r;
            m.commit = world_.vote(id, ShardId{x});
            transport_.send(m);
            changed = true;
        }
    }
    drain(r);
}

void FdsScheduler::commit_decide(Round r) {
    auto node = decisions_.extract(r);
    if (node.empty()) return;
    auto& ids = node.mapped();
    std::sort(ids.begin(), ids.end(), [&](TxnId a, TxnId b) { return state(a).info.lock_seq < state(b).info.lock_seq; });
    for (auto id : ids) {
        auto& st = state(id);
        sch_ldr_[st.flat].erase(id);
        st.info.decision_round = r;
        st.info.finalize_round = r + st.info.d + 1;
        finalizes_[*st.info.finalize_round].push_back(id);
        for (auto s : st.shards) {
            Message m;
            m.kind = MessageKind::confirm;
            m.txn = id;
            m.src = st.info.leader;
            m.dst = s;
            m.send_round = r;
            m.commit = st.info.commit;
            transport_.send(m);
        }
    }
    drain(r);
}

void FdsScheduler::step(Round r) {
    drain(r);
    phase_ship(r);
    drain(r);
    phase_color(r);
    drain(r);
    phase_apply(r);
    commit_finalize(r);
    commit_vote(r);
    commit_decide(r);
}

std::optional<WindowViolation> check_period_windows(const MetricsTrace& trace, Rational rho, std::int64_t b,
                                                    std::uint32_t s, const EpochClock& clock, std::uint32_t layers) {
    const std::uint64_t limit = 2 * static_cast<std::uint64_t>(b) * s;
    const Round end = trace.rounds.empty() ? 0 : trace.rounds.back().round + 1;
    for (std::uint32_t k = 0; k < layers; ++k) {
        const Round p = clock.period(k);
        if (rho.num * p > b * rho.den) continue;
        std::vector<std::uint64_t> counts(static_cast<std::size_t>((end + p - 1) / p), 0);
        for (const auto& t : trace.txns) {
            if (t.injection_round >= 0 && t.injection_round < end) ++counts[static_cast<std::size_t>(t.injection_round / p)];
        }
        for (std::size_t w = 0; w < counts.size(); ++w) {
            if (counts[w] > limit) return WindowViolation{k, static_cast<Round>(w) * p, counts[w]};
        }
    }
    return std::nullopt;
}

StabilityReport fds_check_stability(const MetricsTrace& trace, Rational rho, std::int64_t b, std::uint32_t k,
                                    std::uint32_t s, std::uint32_t d, double c1, const EpochClock& clock,
                                    std::uint32_t layers) {
    StabilityReport rep;
    const double log_s = log2_ceil_at_least_1(s);
    const double dd = std::max<std::uint32_t>(d, 1);
    const double rate = std::max(1.0 / k, 1.0 / std::sqrt(static_cast<double>(s))) / (c1 * dd * log_s * log_s);
    rep.precondition = rho.value() <= rate;
    rep.pending_limit = 4 * static_cast<std::uint64_t>(b) * s;
    rep.latency_limit = static_cast<Round>(
        std::floor(2.0 * c1 * static_cast<double>(b) * dd * log_s * log_s * std::min<double>(k, ceil_sqrt(s))));
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
    if (auto w = check_period_windows(trace, rho, b, s, clock, layers)) {
        const bool pre = rep.precondition;
        rep.precondition = true;
        rep.violate("P_" + std::to_string(w->k) + " window at round " + std::to_string(w->start) + ": " +
                    std::to_string(w->count) + " new transactions > 2bs");
        rep.precondition = pre;
    }
    return rep;
}

}  // namespace shard_sched

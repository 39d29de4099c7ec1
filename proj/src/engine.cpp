#include "shard_sched/engine.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <thread>
#include <unordered_map>

namespace shard_sched {

Topology make_topology(const RunConfig& config) {
    if (config.topology == "uniform") return Topology::uniform(config.s);
    if (config.topology == "line") return Topology::line(config.s);
    if (config.topology.rfind("file:", 0) == 0) {
        Topology t = [&] {
            try {
                return load_topology(config.topology.substr(5));
            } catch (const std::invalid_argument& e) {
                throw ConfigError("topology", e.what());
            }
        }();
        if (t.shards() != config.s) {
            throw ConfigError("topology", "file has " + std::to_string(t.shards()) + " shards but s = " +
                                              std::to_string(config.s));
        }
        return t;
    }
    throw ConfigError("topology", "unknown topology '" + config.topology + "'");
}

InjectionTrace make_trace(const RunConfig& config) {
    if (!config.trace.empty()) {
        std::ifstream in(config.trace);
        if (!in) throw ConfigError("trace", "cannot open '" + config.trace + "'");
        try {
            return read_trace(in);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("trace", e.what());
        }
    }
    try {
        if (config.adversary == AdversaryKind::theorem1) {
            return theorem1_adversary(config.k, config.s, config.rho, config.b, config.rounds, config.seed);
        }
        return token_bucket_generator(config.adversary_params(), config.s, config.rounds);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("adversary", e.what());
    }
}

RunResult run(const RunConfig& config) {
    config.validate();
    return run_trace(config, make_trace(config));
}

RunResult run_trace(const RunConfig& config, const InjectionTrace& trace) {
    config.validate();
    const Topology topology = make_topology(config);
    if (trace.shards != config.s) {
        throw ConfigError("trace", "trace has " + std::to_string(trace.shards) + " shards but s = " +
                                       std::to_string(config.s));
    }
    World world(config.s, OutcomeModel{config.seed, config.abort_prob});

    std::unique_ptr<ClusterHierarchy> hierarchy;
    std::unique_ptr<Scheduler> scheduler;
    BdsScheduler* bds = nullptr;
    FdsScheduler* fds = nullptr;
    try {
        if (config.scheduler == SchedulerKind::bds) {
            auto p = std::make_unique<BdsScheduler>(world, topology,
                                                    BdsOptions{config.retry_aborts, config.coloring});
            bds = p.get();
            scheduler = std::move(p);
        } else {
            hierarchy = std::make_unique<ClusterHierarchy>(build_hierarchy(topology));
            auto p = std::make_unique<FdsScheduler>(world, topology, *hierarchy, FdsOptions{config.c, config.coloring});
            fds = p.get();
            scheduler = std::move(p);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("scheduler", e.what());
    }

    RunResult out;
    auto& m = out.metrics;
    m.shards = config.s;
    m.rounds.reserve(static_cast<std::size_t>(config.rounds));
    m.shard_queue.reserve(static_cast<std::size_t>(config.rounds));
    for (Round r = 0; r < config.rounds; ++r) {
        scheduler->step(r);
        if (r < trace.rounds()) {
            for (const auto& inj : trace.by_round[static_cast<std::size_t>(r)]) {
                auto t = trace.transaction(inj);
                if (t.shards().size() > config.k) {
                    throw ConfigError("k", "txn " + std::to_string(t.id) + " accesses " +
                                               std::to_string(t.shards().size()) + " shards > k");
                }
                t.injection_round = r;
                const auto id = t.id;
                world.add(std::move(t));
                scheduler->inject(id);
            }
        }
        RoundSample sample;
        sample.round = r;
        sample.in_flight = scheduler->in_flight();
        sample.pending_total = world.unfinished() - sample.in_flight;
        sample.committed_cum = world.committed();
        sample.aborted_cum = world.aborted();
        m.rounds.push_back(sample);
        m.shard_queue.emplace_back(world.unfinished_by_home().begin(), world.unfinished_by_home().end());
    }

    for (const auto& t : world.transactions()) {
        TxnRecord rec;
        rec.id = t.id;
        rec.home = t.home;
        rec.destinations = t.shards();
        rec.injection_round = t.injection_round;
        rec.status = t.status;
        rec.finish_round = t.commit_round;
        m.txns.push_back(std::move(rec));
    }
    m.ledgers.assign(world.ledgers().begin(), world.ledgers().end());

    if (bds) {
        m.epochs.assign(bds->epochs().begin(), bds->epochs().end());
        std::vector<const Transaction*> done;
        for (const auto& t : world.transactions()) {
            if (t.status == TxnStatus::committed) done.push_back(&t);
        }
        std::sort(done.begin(), done.end(), [](const Transaction* a, const Transaction* b) {
            return std::pair(*a->commit_round, a->id) < std::pair(*b->commit_round, b->id);
        });
        for (const auto* t : done) out.serialization.push_back(t->id);
        out.stability = bds_check_stability(m, config.rho, config.b, config.k, config.s);
    } else {
        for (auto id : fds->lock_order()) {
            if (world.txn(id).status == TxnStatus::committed) out.serialization.push_back(id);
        }
        out.stability = fds_check_stability(m, config.rho, config.b, config.k, config.s, topology.diameter(), config.c1,
                                            fds->clock(), hierarchy->layers());
    }
    out.growth = detect_growth(m);
    return out;
}

CheckResult check_atomicity(const MetricsTrace& trace) {
    CheckResult res;
    auto fail = [&](std::string what) {
        if (res.ok) res.first_failure = std::move(what);
        res.ok = false;
    };
    std::unordered_map<TxnId, const TxnRecord*> by_id;
    for (const auto& t : trace.txns) by_id[t.id] = &t;
    // (txn, shard) -> number of ledger entries and their round
    std::vector<std::unordered_map<TxnId, std::pair<int, Round>>> seen(trace.ledgers.size());
    for (std::size_t s = 0; s < trace.ledgers.size(); ++s) {
        for (const auto& e : trace.ledgers[s].entries()) {
            auto& slot = seen[s][e.txn];
            ++slot.first;
            slot.second = e.round;
            auto it = by_id.find(e.txn);
            if (it == by_id.end()) fail("ledger S" + std::to_string(s + 1) + " holds unknown txn " + std::to_string(e.txn));
        }
    }
    for (const auto& t : trace.txns) {
        const bool committed = t.status == TxnStatus::committed;
        for (auto d : t.destinations) {
            auto it = seen[d.index].find(t.id);
            const int count = it == seen[d.index].end() ? 0 : it->second.first;
            if (committed && (count != 1 || it->second.second != *t.finish_round)) {
                fail("txn " + std::to_string(t.id) + " not committed exactly once at round " +
                     std::to_string(*t.finish_round) + " on " + d.name());
            }
            if (!committed && count != 0) fail("uncommitted txn " + std::to_string(t.id) + " on ledger " + d.name());
            if (it != seen[d.index].end()) seen[d.index].erase(it);
        }
    }
    for (std::size_t s = 0; s < seen.size(); ++s) {
        if (!seen[s].empty()) {
            fail("ledger S" + std::to_string(s + 1) + " holds txn " + std::to_string(seen[s].begin()->first) +
                 " that does not access it");
        }
    }
    return res;
}

CheckResult check_ledger_order(const MetricsTrace& trace, std::span<const TxnId> order) {
    CheckResult res;
    std::unordered_map<TxnId, std::size_t> rank;
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    for (const auto& ledger : trace.ledgers) {
        std::size_t prev = 0;
        bool first = true;
        for (const auto& e : ledger.entries()) {
            auto it = rank.find(e.txn);
            if (it == rank.end() || (!first && it->second <= prev)) {
                res.ok = false;
                res.first_failure = "ledger " + ledger.shard().name() + " breaks the serialization order at txn " +
                                    std::to_string(e.txn);
                return res;
            }
            prev = it->second;
            first = false;
        }
    }
    return res;
}

CheckResult check_pairwise_consistency(const MetricsTrace& trace) {
    CheckResult res;
    std::vector<std::unordered_map<TxnId, std::size_t>> pos(trace.ledgers.size());
    for (std::size_t s = 0; s < trace.ledgers.size(); ++s) {
        const auto entries = trace.ledgers[s].entries();
        for (std::size_t i = 0; i < entries.size(); ++i) pos[s][entries[i].txn] = i;
    }
    for (std::size_t a = 0; a < trace.ledgers.size(); ++a) {
        const auto ea = trace.ledgers[a].entries();
        for (std::size_t b = a + 1; b < trace.ledgers.size(); ++b) {
            for (std::size_t i = 0; i < ea.size(); ++i) {
                auto pi = pos[b].find(ea[i].txn);
                if (pi == pos[b].end()) continue;
                for (std::size_t j = i + 1; j < ea.size(); ++j) {
                    auto pj = pos[b].find(ea[j].txn);
                    if (pj != pos[b].end() && pj->second < pi->second) {
                        res.ok = false;
                        res.first_failure = "txns " + std::to_string(ea[i].txn) + " and " + std::to_string(ea[j].txn) +
                                            " ordered differently on S" + std::to_string(a + 1) + " and S" +
                                            std::to_string(b + 1);
                        return res;
                    }
                }
            }
        }
    }
    return res;
}

std::vector<SweepPoint> sweep(const RunConfig& base, std::span<const Rational> rhos, std::span<const std::int64_t> bs,
                              unsigned threads) {
    std::vector<RunConfig> configs;
    for (auto b : bs) {
        for (auto rho : rhos) {
            RunConfig c = base;
            c.rho = rho;
            c.b = b;
            c.validate();
            configs.push_back(c);
        }
    }
    std::vector<SweepPoint> out(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                auto r = run(configs[i]);
                out[i] = SweepPoint{configs[i].rho, configs[i].b, summarize(r.metrics), r.growth};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace shard_sched

#include "shard_sched/scenarios.hpp"

namespace shard_sched {

InjectionTrace example_trace(std::uint32_t shards, std::array<ShardId, 4> abcd, Round t) {
    InjectionTrace trace;
    trace.shards = shards;
    trace.accounts_per_shard = 1;
    trace.by_round.resize(static_cast<std::size_t>(t) + 1);
    const AccountLayout layout{shards, 1};
    auto acct = [&](int i) { return layout.account(abcd[i].index); };
    const auto [a, b, c, d] = abcd;
    auto& round = trace.by_round.back();
    round.push_back(Injection{t, 1, a, {acct(0), acct(1)}});
    round.push_back(Injection{t, 2, c, {acct(0), acct(3)}});
    round.push_back(Injection{t, 3, c, {acct(1), acct(2)}});
    round.push_back(Injection{t, 4, d, {acct(2), acct(3)}});
    return trace;
}

namespace {

template <typename Sched, typename Fill>
ExampleResult drive(World& world, Sched& sched, const InjectionTrace& trace, Round t, Round rounds, Fill fill) {
    for (Round r = 0; r < rounds; ++r) {
        sched.step(r);
        if (r < trace.rounds()) {
            for (const auto& inj : trace.by_round[static_cast<std::size_t>(r)]) {
                world.add(trace.transaction(inj));
                sched.inject(inj.id);
            }
        }
    }
    ExampleResult out;
    out.t = t;
    for (TxnId id = 1; id <= 4; ++id) {
        auto& rec = out.txns[id - 1];
        rec.id = id;
        if (world.txn(id).status == TxnStatus::committed) rec.committed = world.txn(id).commit_round;
        fill(rec);
    }
    return out;
}

}  // namespace

ExampleResult run_bds_example() {
    const Round t = 1;
    const auto topo = Topology::uniform(4);
    World world(4, {});
    BdsScheduler sched(world, topo);
    const auto trace = example_trace(4, {ShardId{0}, ShardId{1}, ShardId{2}, ShardId{3}}, t);
    return drive(world, sched, trace, t, 40, [&](ExampleTxnResult& rec) { rec.color = *sched.color_of(rec.id); });
}

ExampleResult run_fds_example() {
    const Round t = 95;
    const auto topo = Topology::line(8);
    const auto hierarchy = line_cluster_hierarchy(topo);
    World world(8, {});
    FdsScheduler sched(world, topo, hierarchy);
    const auto trace = example_trace(8, {ShardId{1}, ShardId{3}, ShardId{4}, ShardId{5}}, t);
    return drive(world, sched, trace, t, 200, [&](ExampleTxnResult& rec) {
        const auto& info = sched.info(rec.id);
        rec.color = info.height ? info.height->color : 0;
        rec.queued = info.queued_round;
        rec.d = info.d;
        rec.cluster = info.cluster;
        rec.leader = info.leader;
    });
}

}  // namespace shard_sched

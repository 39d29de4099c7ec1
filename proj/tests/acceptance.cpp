// One line per criterion: "PASS <id> ..." or "FAIL <id> ...".
// With an id argument only that criterion runs; exit status is non-zero on FAIL.

#include "shard_sched/engine.hpp"
#include "shard_sched/report.hpp"
#include "shard_sched/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace shard_sched;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::string str(std::optional<Round> r) { return r ? std::to_string(*r) : "never"; }

// ---------------------------------------------------------------- 1

Outcome c1() {
    Outcome o;
    const auto res = run_bds_example();
    const std::array<std::uint32_t, 4> colors{0, 1, 1, 0};
    const std::array<Round, 4> rel{6, 10, 10, 6};
    std::ostringstream got;
    for (int i = 0; i < 4; ++i) {
        const auto& x = res.txns[i];
        got << " T" << x.id << ":c" << x.color << "@t+" << (x.committed ? *x.committed - res.t : -1);
        o.require(x.color == colors[i], "T" + std::to_string(x.id) + " color " + std::to_string(x.color));
        o.require(x.committed && *x.committed - res.t == rel[i],
                  "T" + std::to_string(x.id) + " committed at " + str(x.committed));
    }
    if (o.pass) o.detail = got.str();
    return o;
}

// ---------------------------------------------------------------- 2

// The epoch that picks up the example starts one round after injection.
struct FdsExample {
    ExampleResult res;
    Round t = 0;
};

FdsExample fds_example() {
    FdsExample ex;
    ex.res = run_fds_example();
    ex.t = ex.res.t + 1;
    return ex;
}

std::string describe(const ExampleTxnResult& x, Round t) {
    std::ostringstream s;
    s << "T" << x.id << " d=" << x.d << " queued t+" << (x.queued ? *x.queued - t : -1) << " committed t+"
      << (x.committed ? *x.committed - t : -1) << " (bounds t+" << 2 * x.d << ", t+" << 5 * x.d << ")";
    return s.str();
}

Outcome c2_queue(std::initializer_list<int> which) {
    Outcome o;
    const auto ex = fds_example();
    std::string all;
    for (int i : which) {
        const auto& x = ex.res.txns[i];
        all += " " + describe(x, ex.t) + ";";
        o.require(x.queued && *x.queued == ex.t + 2 * static_cast<Round>(x.d), describe(x, ex.t));
    }
    if (o.pass) o.detail = all;
    return o;
}

Outcome c2_commit(std::initializer_list<int> which) {
    Outcome o;
    const auto ex = fds_example();
    std::string all;
    for (int i : which) {
        const auto& x = ex.res.txns[i];
        all += " " + describe(x, ex.t) + ";";
        o.require(x.committed && *x.committed <= ex.t + 5 * static_cast<Round>(x.d), describe(x, ex.t));
    }
    if (o.pass) o.detail = all;
    return o;
}

// 2a: T1, T3, T4 queued at t+2d1
Outcome c2a() { return c2_queue({0, 2, 3}); }
// 2b: T1, T4 committed by t+5d1
Outcome c2b() { return c2_commit({0, 3}); }
// 2c: T3 committed by t+5d1
Outcome c2c() { return c2_commit({2}); }
// 2d: T2 queued at t+2d2 and committed by t+5d2
Outcome c2d() {
    auto o = c2_queue({1});
    if (!o.pass) return o;
    return c2_commit({1});
}

// ---------------------------------------------------------------- 3

Outcome c3() {
    Outcome o;
    std::uint64_t max_pending = 0;
    Round max_latency = 0, max_epoch = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RunConfig c;
        c.s = 16;
        c.k = 4;
        c.b = 2;
        c.rho = Rational(1, 72);
        c.rounds = 20000;
        c.seed = seed;
        const auto r = run(c);
        const auto& st = r.stability;
        o.require(st.precondition, "precondition not met");
        o.require(st.ok, "seed " + std::to_string(seed) + ": " + st.first_violation);
        max_pending = std::max(max_pending, st.max_pending);
        max_latency = std::max(max_latency, st.max_latency);
        max_epoch = std::max(max_epoch, st.max_epoch_length);
    }
    if (o.pass) {
        o.detail = "max pending " + std::to_string(max_pending) + "/128, max latency " + std::to_string(max_latency) +
                   "/288, max epoch " + std::to_string(max_epoch) + "/144";
    }
    return o;
}

// ---------------------------------------------------------------- 4

Outcome c4() {
    Outcome o;
    std::uint64_t max_pending = 0, injected = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RunConfig c;
        c.scheduler = SchedulerKind::fds;
        c.topology = "line";
        c.s = 16;
        c.k = 4;
        c.b = 2;
        // 1 / (60 * d * H2 * k) with d = 15 and two sublayers
        c.rho = Rational(1, 7200);
        // 60 * H2 / log^2 s: the bound check's precondition holds exactly at this rate
        c.c1 = 7.5;
        c.rounds = 20000;
        c.seed = seed;
        const auto r = run(c);
        const auto& st = r.stability;
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        o.require(st.precondition, tag + "precondition not met");
        o.require(st.ok, tag + st.first_violation);
        o.require(st.max_pending <= 128, tag + "pending " + std::to_string(st.max_pending));
        o.require(!r.growth.growing, tag + "growing");
        max_pending = std::max(max_pending, st.max_pending);
        injected += r.metrics.txns.size();
        const auto window = check_period_windows(r.metrics, c.rho, c.b, c.s, EpochClock::make(c.s, c.c),
                                                 line_layer_count(c.s));
        o.require(!window, tag + "window check failed");
    }
    if (o.pass) {
        o.detail = "max pending " + std::to_string(max_pending) + "/128, " + std::to_string(injected) +
                   " txns over 10 seeds, stable, windows ok";
    }
    return o;
}

// ---------------------------------------------------------------- 5

Outcome c5() {
    Outcome o;
    std::ostringstream slopes;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunConfig c;
        c.adversary = AdversaryKind::theorem1;
        c.k = 3;
        c.s = 6;
        c.b = 2;
        c.rho = Rational(3, 5);
        c.rounds = 4000;
        c.seed = seed;
        const auto r = run(c);
        o.require(r.growth.growing && r.growth.slope > 0, "seed " + std::to_string(seed) + " not growing");
        slopes << " " << fixed6(r.growth.slope);
    }
    if (o.pass) o.detail = "width " + std::to_string(theorem1_width(3, 6)) + ", slopes" + slopes.str();
    return o;
}

// ---------------------------------------------------------------- 6

Outcome c6() {
    Outcome o;
    std::mt19937_64 rng(2024);
    // random graphs
    for (int trial = 0; trial < 1000 && o.pass; ++trial) {
        const auto shards = 1 + static_cast<std::uint32_t>(rng() % 20);
        const AccountLayout layout{shards, 2};
        const int n = 1 + static_cast<int>(rng() % 60);
        std::vector<Transaction> txns;
        for (int i = 0; i < n; ++i) {
            Transaction t;
            t.id = static_cast<TxnId>(i);
            const int m = 1 + static_cast<int>(rng() % 5);
            for (int j = 0; j < m; ++j) t.accounts.push_back(layout.account(static_cast<std::uint32_t>(rng() % layout.total())));
            normalize_accounts(t.accounts);
            txns.push_back(t);
        }
        const auto g = build_conflict_graph(txns);
        const auto col = greedy_color(g);
        o.require(is_proper(g, col), "improper coloring in trial " + std::to_string(trial));
        o.require(col.num_colors <= g.max_degree() + 1, "more than max degree + 1 colors");
    }
    // instability cliques
    for (auto [k, s] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 3}, {3, 6}, {4, 10}, {5, 9}}) {
        const auto width = theorem1_width(k, s);
        const auto trace = theorem1_adversary(k, s, Rational(1, 1), static_cast<std::int64_t>(width), 1);
        std::vector<Transaction> batch;
        for (const auto& inj : trace.by_round[0]) batch.push_back(trace.transaction(inj));
        o.require(batch.size() >= width, "short batch");
        batch.resize(width);
        const auto col = greedy_color(build_conflict_graph(batch));
        o.require(col.num_colors == width, "clique of width " + std::to_string(width) + " took " +
                                               std::to_string(col.num_colors) + " colors");
    }
    // heavy/light split on s = 16, k = 8, b = 2: per-shard congestion at most 2b
    const std::uint32_t s = 16, k = 8, sq = ceil_sqrt(s);
    const std::int64_t b = 2;
    const std::uint64_t zeta = 2 * b * sq + (2 * b - 1) * sq + 1;
    std::uint32_t worst = 0, worst_heavy = 0;
    const AccountLayout layout{s, 1};
    for (int trial = 0; trial < 1000 && o.pass; ++trial) {
        std::vector<std::uint32_t> load(s, 0);
        std::vector<Transaction> txns;
        for (int attempt = 0; attempt < 400; ++attempt) {
            const auto m = 1 + static_cast<std::uint32_t>(rng() % k);
            std::vector<std::uint32_t> pick(s);
            std::iota(pick.begin(), pick.end(), 0u);
            std::shuffle(pick.begin(), pick.end(), rng);
            pick.resize(m);
            if (std::any_of(pick.begin(), pick.end(), [&](std::uint32_t x) { return load[x] >= 2 * b; })) continue;
            Transaction t;
            t.id = static_cast<TxnId>(txns.size());
            for (auto x : pick) {
                ++load[x];
                t.accounts.push_back(layout.account(x));
            }
            normalize_accounts(t.accounts);
            txns.push_back(t);
        }
        std::vector<const Transaction*> ptrs;
        std::uint32_t heavy = 0;
        for (const auto& t : txns) {
            ptrs.push_back(&t);
            if (t.shards().size() > sq) ++heavy;
        }
        const auto colors = heavy_light_color_by_accounts(ptrs, sq);
        const auto g = build_conflict_graph(txns);
        Coloring col;
        col.color = colors;
        o.require(is_proper(g, col), "heavy_light coloring improper");
        const auto used = colors.empty() ? 0u : *std::max_element(colors.begin(), colors.end()) + 1;
        o.require(heavy <= 2 * b * sq, "more than 2b ceil(sqrt s) heavy transactions");
        o.require(used <= zeta, "heavy_light used " + std::to_string(used) + " colors > " + std::to_string(zeta));
        worst = std::max(worst, used);
        worst_heavy = std::max(worst_heavy, heavy);
    }
    if (o.pass) {
        o.detail = "1000 graphs proper within max degree + 1; cliques exact; heavy_light max " + std::to_string(worst) +
                   "/" + std::to_string(zeta) + " colors, max heavy " + std::to_string(worst_heavy) + "/" +
                   std::to_string(2 * b * sq);
    }
    return o;
}

// ---------------------------------------------------------------- 7

// Every interval of every shard via prefix sums; first violation by
// (end, length, shard) like check_admissible.
std::optional<AdmissibilityViolation> exhaustive(const InjectionTrace& trace, Rational rho, std::int64_t b) {
    const auto cong = trace.congestion();
    const auto T = cong.size();
    std::vector<std::vector<std::int64_t>> prefix(trace.shards, std::vector<std::int64_t>(T + 1, 0));
    for (std::uint32_t s = 0; s < trace.shards; ++s) {
        for (std::size_t r = 0; r < T; ++r) prefix[s][r + 1] = prefix[s][r] + cong[r][s];
    }
    for (std::size_t y = 0; y < T; ++y) {
        for (std::size_t len = 1; len <= y + 1; ++len) {
            const std::size_t x = y + 1 - len;
            const auto allowed = rho.floor_times(static_cast<std::int64_t>(len)) + b;
            for (std::uint32_t s = 0; s < trace.shards; ++s) {
                const auto count = prefix[s][y + 1] - prefix[s][x];
                if (count > allowed) {
                    return AdmissibilityViolation{ShardId{s}, static_cast<Round>(x), static_cast<Round>(y), count,
                                                  allowed};
                }
            }
        }
    }
    return std::nullopt;
}

Outcome c7() {
    Outcome o;
    const std::uint32_t s = 8;
    const Round rounds = 5000;
    std::size_t traces = 0, txns = 0;
    std::vector<std::pair<InjectionTrace, std::pair<Rational, std::int64_t>>> outputs;
    for (auto strategy : {Strategy::uniform_random, Strategy::single_epoch_burst}) {
        for (auto [rho, b] : std::vector<std::pair<Rational, std::int64_t>>{{Rational(1, 5), 3}, {Rational(3, 10), 10}}) {
            AdversaryParams p;
            p.rho = rho;
            p.b = b;
            p.k = 4;
            p.seed = 77;
            p.strategy = strategy;
            p.burst_round = 2500;
            outputs.push_back({token_bucket_generator(p, s, rounds), {rho, b}});
        }
    }
    outputs.push_back({theorem1_adversary(3, s, Rational(3, 5), 2, rounds, 5), {Rational(3, 5), 2}});
    for (const auto& [trace, params] : outputs) {
        const auto naive = exhaustive(trace, params.first, params.second);
        o.require(!naive, "generator output violates on S" + std::to_string(naive ? naive->shard.index + 1 : 0));
        o.require(check_admissible(trace, params.first, params.second).admissible, "checker rejects generator output");
        ++traces;
        txns += trace.size();
    }

    // over budget: b + 1 extra transactions on S3 at round 1234 of an admissible trace
    auto bad = outputs.front().first;
    const auto [rho, b] = outputs.front().second;
    auto& round = bad.by_round[1234];
    TxnId next = static_cast<TxnId>(bad.size()) + 1000000;
    for (std::int64_t i = 0; i <= b; ++i) {
        round.push_back(Injection{1234, next++, ShardId{2}, {bad.layout().account_of(ShardId{2}, 0)}});
    }
    const auto want = exhaustive(bad, rho, b);
    const auto got = check_admissible(bad, rho, b);
    o.require(want.has_value(), "over-budget trace passes the exhaustive checker");
    o.require(!got.admissible, "over-budget trace accepted");
    if (want && got.violation) {
        const auto& v = *got.violation;
        o.require(v.shard == want->shard && v.first == want->first && v.last == want->last &&
                      v.congestion == want->congestion,
                  "first violation differs from the exhaustive checker");
        if (o.pass) {
            o.detail = std::to_string(traces) + " generator traces (" + std::to_string(txns) +
                       " txns) admissible; over-budget rejected at " + v.shard.name() + " [" +
                       std::to_string(v.first) + ", " + std::to_string(v.last) + "] " + std::to_string(v.congestion) +
                       " > " + std::to_string(v.allowed);
        }
    }
    return o;
}

// ---------------------------------------------------------------- 8

Outcome c8() {
    Outcome o;
    std::uint64_t committed = 0, aborted = 0;
    std::set<std::uint32_t> layers_seen;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        RunConfig c;
        c.scheduler = SchedulerKind::fds;
        c.topology = "line";
        c.s = 8;
        c.k = 1 + static_cast<std::uint32_t>(seed % 4);
        c.rho = Rational(1, 16 + static_cast<std::int64_t>(seed % 5) * 4);
        c.b = 1 + static_cast<std::int64_t>(seed % 3);
        c.abort_prob = 0.1;
        c.rounds = 3000;
        c.seed = seed;
        c.strategy = seed % 2 ? Strategy::uniform_random : Strategy::single_epoch_burst;
        c.burst_round = 1000;
        const auto r = run(c);
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        const auto a = check_atomicity(r.metrics);
        o.require(a.ok, tag + a.first_failure);
        const auto l = check_ledger_order(r.metrics, r.serialization);
        o.require(l.ok, tag + l.first_failure);
        const auto p = check_pairwise_consistency(r.metrics);
        o.require(p.ok, tag + p.first_failure);
        committed += r.metrics.rounds.empty() ? 0 : r.metrics.rounds.back().committed_cum;
        aborted += r.metrics.rounds.empty() ? 0 : r.metrics.rounds.back().aborted_cum;
        const auto topo = Topology::line(8);
        const auto h = line_cluster_hierarchy(topo);
        for (const auto& t : r.metrics.txns) layers_seen.insert(home_cluster(t.home, t.destinations, h, topo).layer);
    }
    o.require(committed > 0 && aborted > 0, "runs did not exercise both outcomes");
    o.require(layers_seen.size() >= 3, "too few cluster layers exercised");
    if (o.pass) {
        o.detail = "50 runs, " + std::to_string(committed) + " commits, " + std::to_string(aborted) + " aborts, " +
                   std::to_string(layers_seen.size()) + " layers; atomic, ledgers follow the lock order, pairwise consistent";
    }
    return o;
}

// ---------------------------------------------------------------- 9

const std::vector<SweepPoint>& sweep_points() {
    static const std::vector<SweepPoint> points = [] {
        RunConfig base;
        base.scheduler = SchedulerKind::bds;
        base.s = 64;
        base.k = 8;
        base.rounds = 25000;
        base.seed = 1;
        base.strategy = Strategy::single_epoch_burst;
        base.burst_round = 1000;
        std::vector<Rational> rhos;
        for (int i = 1; i <= 6; ++i) rhos.emplace_back(i, 20);
        const std::vector<std::int64_t> bs{1000, 3000};
        return sweep(base, rhos, bs, std::max(1u, std::thread::hardware_concurrency()));
    }();
    return points;
}

using Metric = double (*)(const SweepPoint&);
double pending_of(const SweepPoint& p) { return p.summary.avg_pending; }
double latency_of(const SweepPoint& p) { return p.summary.avg_latency; }

std::vector<double> curve(std::int64_t b, Metric m) {
    std::vector<double> out;
    for (const auto& p : sweep_points()) {
        if (p.b == b) out.push_back(m(p));
    }
    return out;
}

std::string fmt_curve(const std::vector<double>& v) {
    std::string s;
    for (auto x : v) s += (s.empty() ? "" : " ") + fixed6(x).substr(0, fixed6(x).find('.') + 2);
    return s;
}

Outcome monotone(Metric m, const char* name) {
    Outcome o;
    std::string shown;
    for (std::int64_t b : {1000, 3000}) {
        const auto v = curve(b, m);
        shown += " b=" + std::to_string(b) + ": " + fmt_curve(v) + ";";
        for (std::size_t i = 1; i < v.size(); ++i) {
            o.require(v[i] >= v[i - 1], std::string(name) + " drops at b=" + std::to_string(b) + " between rho=" +
                                            std::to_string(i) + "/20 and " + std::to_string(i + 1) +
                                            "/20:" + fmt_curve(v));
        }
    }
    if (o.pass) o.detail = std::string(name) + shown;
    return o;
}

// Mean slope over rho in [0.15, 0.30] must exceed the mean slope over [0.05, 0.15].
Outcome superlinear(Metric m, const char* name) {
    Outcome o;
    std::string shown;
    for (std::int64_t b : {1000, 3000}) {
        const auto v = curve(b, m);
        const double low = (v[2] - v[0]) / 0.10;
        const double high = (v[5] - v[2]) / 0.15;
        shown += " b=" + std::to_string(b) + ": slope " + fixed6(low) + " -> " + fixed6(high) + ";";
        o.require(high > low, std::string(name) + " at b=" + std::to_string(b) + " slope below 0.15 " + fixed6(low) +
                                  " vs above " + fixed6(high) + ":" + fmt_curve(v));
    }
    if (o.pass) o.detail = std::string(name) + shown;
    return o;
}

Outcome c9a() { return monotone(pending_of, "avg pending"); }
Outcome c9b() { return monotone(latency_of, "avg latency"); }
Outcome c9c() { return superlinear(pending_of, "avg pending"); }
Outcome c9d() { return superlinear(latency_of, "avg latency"); }

Outcome c9e() {
    Outcome o;
    for (auto [m, name] : std::vector<std::pair<Metric, const char*>>{{pending_of, "avg pending"}, {latency_of, "avg latency"}}) {
        const auto lo = curve(1000, m);
        const auto hi = curve(3000, m);
        for (std::size_t i = 0; i < lo.size(); ++i) {
            o.require(hi[i] >= lo[i], std::string(name) + " at rho=" + std::to_string(i + 1) + "/20: b=3000 " +
                                          fixed6(hi[i]) + " < b=1000 " + fixed6(lo[i]));
        }
    }
    if (o.pass) o.detail = "b=3000 avg pending and avg latency at or above b=1000 for every rho";
    return o;
}

// ---------------------------------------------------------------- 10

Outcome c10() {
    Outcome o;
    auto csv_of = [](const RunConfig& c) {
        const auto r = run(c);
        std::ostringstream out;
        write_rounds_csv(out, r.metrics);
        write_summary_csv(out, summarize(r.metrics), r.growth, r.stability);
        return out.str();
    };
    std::vector<RunConfig> configs(3);
    configs[0].rounds = 3000;
    configs[1].scheduler = SchedulerKind::fds;
    configs[1].topology = "line";
    configs[1].s = 12;
    configs[1].rho = Rational(1, 20);
    configs[1].abort_prob = 0.2;
    configs[1].rounds = 3000;
    configs[2].adversary = AdversaryKind::theorem1;
    configs[2].k = 3;
    configs[2].s = 6;
    configs[2].rho = Rational(3, 5);
    configs[2].rounds = 2000;
    configs[2].seed = 8;
    std::size_t bytes = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto a = csv_of(configs[i]);
        const auto b = csv_of(configs[i]);
        o.require(a == b, "config " + std::to_string(i) + " differs between runs");
        bytes += a.size();
    }
    if (o.pass) o.detail = "3 configs, " + std::to_string(bytes) + " bytes identical across repeated runs";
    return o;
}

struct Criterion {
    std::string id;
    std::function<Outcome()> fn;
    double budget_s;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"1", c1, 1},       {"2a", c2a, 1},     {"2b", c2b, 1},    {"2c", c2c, 1},   {"2d", c2d, 1},
        {"3", c3, 30},      {"4", c4, 60},      {"5", c5, 30},     {"6", c6, 10},    {"7", c7, 30},
        {"8", c8, 60},      {"9a", c9a, 600},   {"9b", c9b, 600},  {"9c", c9c, 600}, {"9d", c9d, 600},
        {"9e", c9e, 600},   {"10", c10, 10},
    };
    std::vector<const Criterion*> todo;
    for (int i = 1; i < argc; ++i) {
        auto it = std::find_if(all.begin(), all.end(), [&](const Criterion& c) { return c.id == argv[i]; });
        if (it == all.end()) {
            std::cerr << "unknown criterion " << argv[i] << '\n';
            return 2;
        }
        todo.push_back(&*it);
    }
    if (todo.empty()) {
        for (const auto& c : all) todo.push_back(&c);
    }
    int failed = 0;
    for (const auto* c : todo) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c->fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.pass && secs > c->budget_s) {
            o.pass = false;
            o.detail = "over time budget; " + o.detail;
        }
        char timing[64];
        std::snprintf(timing, sizeof timing, " (%.2f s)", secs);
        std::cout << (o.pass ? "PASS " : "FAIL ") << c->id << ':' << (o.detail.empty() ? "" : " ") << o.detail
                  << timing << std::endl;
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}

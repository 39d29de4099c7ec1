#include "shard_sched/adversary.hpp"
#include "shard_sched/coloring.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace shard_sched;

namespace {

// O(T^2) per shard, straight from the definition.
std::optional<AdmissibilityViolation> naive_first_violation(const InjectionTrace& trace, Rational rho,
                                                            std::int64_t b) {
    const auto cong = trace.congestion();
    const auto T = static_cast<Round>(cong.size());
    for (Round y = 0; y < T; ++y) {
        for (Round len = 1; len <= y + 1; ++len) {
            const Round x = y - len + 1;
            for (std::uint32_t s = 0; s < trace.shards; ++s) {
                std::int64_t count = 0;
                for (Round j = x; j <= y; ++j) count += cong[static_cast<std::size_t>(j)][s];
                const auto allowed = rho.floor_times(len) + b;
                if (count > allowed) return AdmissibilityViolation{ShardId{s}, x, y, count, allowed};
            }
        }
    }
    return std::nullopt;
}

InjectionTrace single_shard_trace(std::uint32_t shards, std::vector<std::pair<Round, std::uint32_t>> hits,
                                  Round rounds) {
    InjectionTrace t;
    t.shards = shards;
    t.by_round.resize(static_cast<std::size_t>(rounds));
    TxnId id = 0;
    for (auto [r, s] : hits) {
        t.by_round[static_cast<std::size_t>(r)].push_back(
            Injection{r, id++, ShardId{s}, {AccountLayout{shards, 1}.account(s)}});
    }
    return t;
}

}  // namespace

TEST_CASE("rational parsing") {
    CHECK(Rational::parse("3/5") == Rational(3, 5));
    CHECK(Rational::parse("0.15") == Rational(3, 20));
    CHECK(Rational::parse("1") == Rational(1, 1));
    CHECK(Rational::parse(" 1/144 ").str() == "1/144");
    CHECK(Rational::parse("0.30").str() == "3/10");
    CHECK_THROWS_AS(Rational::parse("abc"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
    CHECK(Rational(3, 5).floor_times(7) == 4);
    CHECK(Rational(1, 72) < Rational(1, 54));
}

TEST_CASE("zero rate burst releases at most b per shard inside the window") {
    AdversaryParams p;
    p.rho = Rational(0, 1);
    p.b = 3;
    p.k = 2;
    p.strategy = Strategy::single_epoch_burst;
    p.burst_round = 10;
    p.burst_rounds = 1;
    const auto trace = token_bucket_generator(p, 6, 50);
    const auto cong = trace.congestion();
    std::vector<std::int64_t> per_shard(6, 0);
    for (Round r = 0; r < 50; ++r) {
        for (std::uint32_t s = 0; s < 6; ++s) {
            per_shard[s] += cong[static_cast<std::size_t>(r)][s];
            if (r != 10) CHECK(cong[static_cast<std::size_t>(r)][s] == 0);
        }
    }
    for (auto c : per_shard) CHECK(c == 3);
    CHECK(check_admissible(trace, p.rho, p.b).admissible);
}

TEST_CASE("generators respect k and are admissible") {
    for (auto strategy : {Strategy::uniform_random, Strategy::single_epoch_burst}) {
        for (auto rho : {Rational(1, 10), Rational(3, 10), Rational(1, 1), Rational(1, 72)}) {
            AdversaryParams p;
            p.rho = rho;
            p.b = 3;
            p.k = 4;
            p.seed = 11;
            p.strategy = strategy;
            p.burst_round = 100;
            const auto trace = token_bucket_generator(p, 10, 600);
            for (const auto& round : trace.by_round) {
                for (const auto& inj : round) {
                    const auto shards = trace.transaction(inj).shards();
                    CHECK(shards.size() >= 1);
                    CHECK(shards.size() <= 4);
                }
            }
            CHECK(check_admissible(trace, rho, p.b).admissible);
        }
    }
}

TEST_CASE("steady limiter keeps the long-run rate") {
    AdversaryParams p;
    p.rho = Rational(3, 10);
    p.b = 5;
    p.k = 1;
    p.strategy = Strategy::single_epoch_burst;
    p.burst_round = 5000;
    const auto trace = token_bucket_generator(p, 1, 1000);
    // single shard, single-shard transactions: 0.3 per round
    CHECK(trace.size() == 300);
}

TEST_CASE("large sweep configuration is admissible") {
    AdversaryParams p;
    p.rho = Rational(3, 20);
    p.b = 1000;
    p.k = 8;
    p.seed = 1;
    const auto trace = token_bucket_generator(p, 64, 25000);
    CHECK(trace.size() > 0);
    CHECK(check_admissible(trace, p.rho, p.b).admissible);
}

TEST_CASE("ids are monotone and ties broken by home shard") {
    AdversaryParams p;
    p.rho = Rational(1, 2);
    p.b = 2;
    p.k = 3;
    const auto trace = token_bucket_generator(p, 8, 50);
    TxnId expect = 0;
    for (const auto& round : trace.by_round) {
        for (std::size_t i = 0; i < round.size(); ++i) {
            CHECK(round[i].id == expect++);
            if (i > 0) CHECK(round[i - 1].home <= round[i].home);
        }
    }
}

TEST_CASE("same seed gives the same trace text") {
    AdversaryParams p;
    p.rho = Rational(1, 5);
    p.b = 2;
    p.k = 3;
    p.seed = 42;
    std::ostringstream a, b, c;
    write_trace(a, token_bucket_generator(p, 8, 300));
    write_trace(b, token_bucket_generator(p, 8, 300));
    p.seed = 43;
    write_trace(c, token_bucket_generator(p, 8, 300));
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
}

TEST_CASE("trace round trip") {
    AdversaryParams p;
    p.rho = Rational(1, 3);
    p.b = 2;
    p.k = 3;
    p.accounts_per_shard = 3;
    const auto trace = token_bucket_generator(p, 5, 40);
    std::stringstream ss;
    write_trace(ss, trace);
    const auto back = read_trace(ss);
    CHECK(back.shards == 5);
    CHECK(back.accounts_per_shard == 3);
    CHECK(back.rounds() == 40);
    REQUIRE(back.size() == trace.size());
    std::ostringstream again;
    write_trace(again, back);
    CHECK(again.str() == ss.str());
}

TEST_CASE("malformed trace lines are rejected") {
    std::istringstream bad("# shards 2 accounts_per_shard 1 rounds 3\n0 0 5 0\n");
    CHECK_THROWS_AS(read_trace(bad), std::invalid_argument);
}

TEST_CASE("instability construction width") {
    CHECK(theorem1_width(2, 3) == 3);
    CHECK(theorem1_width(1, 1) == 2);
    CHECK(theorem1_width(3, 6) == 4);
    CHECK(theorem1_width(5, 10) == 5);
    CHECK(theorem1_width(5, 9) == 4);
    CHECK(theorem1_width(3, 5) == 3);
    CHECK_THROWS_AS(theorem1_width(2, 0), std::invalid_argument);
}

TEST_CASE("instability construction for k = 2, s = 3") {
    const auto trace = theorem1_adversary(2, 3, Rational(1, 1), 2, 1);
    REQUIRE(trace.by_round.size() == 1);
    const auto& r0 = trace.by_round[0];
    REQUIRE(r0.size() == 3);
    std::vector<std::vector<ShardId>> shard_sets;
    for (const auto& inj : r0) shard_sets.push_back(trace.transaction(inj).shards());
    std::sort(shard_sets.begin(), shard_sets.end());
    CHECK(shard_sets[0] == std::vector<ShardId>{ShardId{0}, ShardId{1}});
    CHECK(shard_sets[1] == std::vector<ShardId>{ShardId{0}, ShardId{2}});
    CHECK(shard_sets[2] == std::vector<ShardId>{ShardId{1}, ShardId{2}});
}

TEST_CASE("instability batches are cliques and admissible") {
    for (std::uint64_t seed : {0ULL, 5ULL}) {
        const auto trace = theorem1_adversary(3, 6, Rational(3, 5), 2, 400, seed);
        CHECK(check_admissible(trace, Rational(3, 5), 2).admissible);
        std::vector<Transaction> all;
        for (const auto& round : trace.by_round) {
            for (const auto& inj : round) all.push_back(trace.transaction(inj));
        }
        REQUIRE(all.size() >= 8);
        for (std::size_t start = 0; start + 4 <= all.size(); start += 4) {
            std::vector<Transaction> batch(all.begin() + static_cast<long>(start),
                                           all.begin() + static_cast<long>(start) + 4);
            const auto g = build_conflict_graph(batch);
            CHECK(g.edge_count() == 6);
            CHECK(greedy_color(g).num_colors == 4);
            for (const auto& t : batch) CHECK(t.shards().size() == 3);
        }
    }
}

TEST_CASE("check_admissible corner cases") {
    SUBCASE("empty trace") {
        InjectionTrace t;
        t.shards = 3;
        CHECK(check_admissible(t, Rational(1, 2), 1).admissible);
    }
    SUBCASE("b + 1 hits in round 0 at rate zero") {
        const auto t = single_shard_trace(2, {{0, 1}, {0, 1}, {0, 1}}, 5);
        const auto res = check_admissible(t, Rational(0, 1), 2);
        REQUIRE_FALSE(res.admissible);
        CHECK(res.violation->shard == ShardId{1});
        CHECK(res.violation->first == 0);
        CHECK(res.violation->last == 0);
        CHECK(res.violation->congestion == 3);
        CHECK(res.violation->allowed == 2);
    }
    SUBCASE("violation found only over a longer window") {
        // rate 1/2, b 1: three hits in rounds 0..2 exceed floor(3/2) + 1 = 2
        const auto t = single_shard_trace(1, {{0, 0}, {2, 0}, {2, 0}}, 4);
        const auto res = check_admissible(t, Rational(1, 2), 1);
        REQUIRE_FALSE(res.admissible);
        const auto naive = naive_first_violation(t, Rational(1, 2), 1);
        REQUIRE(naive);
        CHECK(res.violation->last == naive->last);
        CHECK(res.violation->first == naive->first);
        CHECK(res.violation->shard == naive->shard);
    }
}

TEST_CASE("checker agrees with the naive double loop on random traces") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t shards = 1 + static_cast<std::uint32_t>(rng() % 3);
        const Round rounds = 1 + static_cast<Round>(rng() % 40);
        std::vector<std::pair<Round, std::uint32_t>> hits;
        const int n = static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) {
            hits.emplace_back(static_cast<Round>(rng() % static_cast<std::uint64_t>(rounds)),
                              static_cast<std::uint32_t>(rng() % shards));
        }
        std::sort(hits.begin(), hits.end());
        const auto t = single_shard_trace(shards, hits, rounds);
        const Rational rho(rng() % 4, 1 + rng() % 5);
        const std::int64_t b = 1 + static_cast<std::int64_t>(rng() % 3);
        if (rho > Rational(1, 1)) continue;
        const auto res = check_admissible(t, rho, b);
        const auto naive = naive_first_violation(t, rho, b);
        REQUIRE(res.admissible == !naive.has_value());
        if (naive) {
            CHECK(res.violation->last == naive->last);
            CHECK(res.violation->first == naive->first);
            CHECK(res.violation->shard == naive->shard);
            CHECK(res.violation->congestion == naive->congestion);
        }
    }
}

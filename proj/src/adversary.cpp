#include "shard_sched/adversary.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace shard_sched {

namespace {

std::int64_t parse_int(std::string_view text, const char* what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument(std::string("invalid ") + what + ": '" + std::string(text) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    // uniform in [lo, hi]
    std::uint32_t between(std::uint32_t lo, std::uint32_t hi) {
        return std::uniform_int_distribution<std::uint32_t>(lo, hi)(engine_);
    }

private:
    std::mt19937_64 engine_;
};

void assign_ids(std::vector<Injection>& round_injections, TxnId& next_id) {
    std::stable_sort(round_injections.begin(), round_injections.end(),
                     [](const Injection& a, const Injection& b) { return a.home < b.home; });
    for (auto& inj : round_injections) inj.id = next_id++;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d <= 0) throw std::invalid_argument("rational denominator must be positive");
    if (n < 0) throw std::invalid_argument("rational must be non-negative");
    auto g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational Rational::parse(std::string_view text) {
    text = trim(text);
    if (text.empty()) throw std::invalid_argument("empty rational");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        return Rational(parse_int(trim(text.substr(0, slash)), "numerator"),
                        parse_int(trim(text.substr(slash + 1)), "denominator"));
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto whole = text.substr(0, dot);
        auto frac = text.substr(dot + 1);
        if (frac.size() > 12) throw std::invalid_argument("too many decimals in '" + std::string(text) + "'");
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        std::int64_t w = whole.empty() ? 0 : parse_int(whole, "rational");
        std::int64_t f = frac.empty() ? 0 : parse_int(frac, "rational");
        return Rational(w * scale + f, scale);
    }
    return Rational(parse_int(text, "rational"), 1);
}

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

std::int64_t Rational::floor_times(std::int64_t t) const { return (num * t) / den; }

const char* to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::uniform_random: return "uniform_random";
        case Strategy::single_epoch_burst: return "single_epoch_burst";
    }
    return "?";
}

Strategy parse_strategy(std::string_view text) {
    if (text == "uniform_random" || text == "uniform") return Strategy::uniform_random;
    if (text == "single_epoch_burst" || text == "burst") return Strategy::single_epoch_burst;
    throw std::invalid_argument("unknown adversary strategy '" + std::string(text) + "'");
}

void AdversaryParams::validate(std::uint32_t shards) const {
    if (rho > Rational(1, 1)) throw std::invalid_argument("rho must be at most 1, got " + rho.str());
    if (b < 1) throw std::invalid_argument("b must be at least 1");
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (shards < 1) throw std::invalid_argument("shard count must be at least 1");
    if (accounts_per_shard < 1) throw std::invalid_argument("accounts_per_shard must be at least 1");
    if (burst_round < 0 || burst_rounds < 1) throw std::invalid_argument("invalid burst window");
}

std::size_t InjectionTrace::size() const {
    std::size_t n = 0;
    for (const auto& r : by_round) n += r.size();
    return n;
}

std::vector<std::vector<std::uint32_t>> InjectionTrace::congestion() const {
    std::vector<std::vector<std::uint32_t>> out(by_round.size(), std::vector<std::uint32_t>(shards, 0));
    for (std::size_t r = 0; r < by_round.size(); ++r) {
        for (const auto& inj : by_round[r]) {
            std::vector<ShardId> touched;
            for (const auto& a : inj.accounts) touched.push_back(a.owner);
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            for (auto s : touched) ++out[r][s.index];
        }
    }
    return out;
}

Transaction InjectionTrace::transaction(const Injection& inj) const {
    Transaction t;
    t.id = inj.id;
    t.home = inj.home;
    t.accounts = inj.accounts;
    normalize_accounts(t.accounts);
    t.injection_round = inj.round;
    return t;
}

InjectionTrace token_bucket_generator(const AdversaryParams& params, std::uint32_t shards, Round rounds) {
    params.validate(shards);
    if (rounds < 0) throw std::invalid_argument("rounds must be non-negative");

    InjectionTrace trace;
    trace.shards = shards;
    trace.accounts_per_shard = params.accounts_per_shard;
    trace.by_round.resize(static_cast<std::size_t>(rounds));
    const AccountLayout layout = trace.layout();

    // Token counts are kept in units of 1/den so refills stay exact.
    const std::int64_t unit = params.rho.den;
    const std::int64_t capacity = params.b * unit;
    std::vector<std::int64_t> bucket(shards, capacity);
    // Steady-rate limiter for the burst strategy: releases one transaction at a
    // time but keeps the fractional carry, so the long-run rate stays rho.
    std::vector<std::int64_t> steady(shards, 0);
    const bool burst_strategy = params.strategy == Strategy::single_epoch_burst;

    Rng rng(params.seed);
    TxnId next_id = 0;
    std::vector<std::uint32_t> available;
    available.reserve(shards);

    for (Round r = 0; r < rounds; ++r) {
        for (std::uint32_t s = 0; s < shards; ++s) {
            bucket[s] = std::min(capacity, bucket[s] + params.rho.num);
            steady[s] = std::min(2 * unit - 1, steady[s] + params.rho.num);
        }
        const bool in_burst =
            burst_strategy && r >= params.burst_round && r < params.burst_round + params.burst_rounds;
        const bool rate_limited = burst_strategy && !in_burst;

        auto eligible = [&](std::uint32_t s) {
            return bucket[s] >= unit && (!rate_limited || steady[s] >= unit);
        };

        auto& out = trace.by_round[static_cast<std::size_t>(r)];
        for (;;) {
            available.clear();
            for (std::uint32_t s = 0; s < shards; ++s) {
                if (eligible(s)) available.push_back(s);
            }
            if (available.empty()) break;

            const auto width = std::min<std::uint32_t>(params.k, static_cast<std::uint32_t>(available.size()));
            const auto size = rng.between(1, width);
            for (std::uint32_t i = 0; i < size; ++i) {
                auto j = rng.between(i, static_cast<std::uint32_t>(available.size()) - 1);
                std::swap(available[i], available[j]);
            }
            Injection inj;
            inj.round = r;
            inj.home = ShardId{rng.between(0, shards - 1)};
            for (std::uint32_t i = 0; i < size; ++i) {
                const auto s = available[i];
                const auto slot = params.accounts_per_shard == 1 ? 0 : rng.between(0, params.accounts_per_shard - 1);
                inj.accounts.push_back(layout.account_of(ShardId{s}, slot));
                bucket[s] -= unit;
                if (rate_limited) steady[s] -= unit;
            }
            normalize_accounts(inj.accounts);
            out.push_back(std::move(inj));
        }
        assign_ids(out, next_id);
    }
    return trace;
}

std::uint32_t theorem1_width(std::uint32_t k, std::uint32_t s) {
    if (s < 1) throw std::invalid_argument("theorem1 construction needs s >= 1");
    if (k < 1) throw std::invalid_argument("theorem1 construction needs k >= 1");
    const std::uint64_t kk = k;
    if (kk * (kk + 1) / 2 <= s) return k + 1;
    std::uint64_t p = 1;
    while ((p + 1) * (p + 2) / 2 <= s) ++p;
    return static_cast<std::uint32_t>(p + 1);
}

InjectionTrace theorem1_adversary(std::uint32_t k, std::uint32_t s, Rational rho, std::int64_t b, Round rounds,
                                  std::uint64_t seed) {
    const std::uint32_t width = theorem1_width(k, s);
    if (b < 1) throw std::invalid_argument("b must be at least 1");
    if (rho > Rational(1, 1)) throw std::invalid_argument("rho must be at most 1");

    // Pair (a, c), a < c, owns a private shard; member i accesses every shard of a pair containing i.
    std::vector<std::vector<std::uint32_t>> member_shards(width);
    std::uint32_t next_shard = 0;
    for (std::uint32_t a = 0; a < width; ++a) {
        for (std::uint32_t c = a + 1; c < width; ++c) {
            member_shards[a].push_back(next_shard);
            member_shards[c].push_back(next_shard);
            ++next_shard;
        }
    }

    std::vector<std::uint32_t> place(s);
    std::iota(place.begin(), place.end(), 0u);
    if (seed != 0) {
        Rng rng(seed);
        for (std::uint32_t i = s; i-- > 1;) std::swap(place[i], place[rng.between(0, i)]);
    }
    for (auto& shards : member_shards) {
        for (auto& x : shards) x = place[x];
    }

    InjectionTrace trace;
    trace.shards = s;
    trace.accounts_per_shard = 1;
    trace.by_round.resize(static_cast<std::size_t>(std::max<Round>(rounds, 0)));
    const AccountLayout layout = trace.layout();

    const std::int64_t unit = rho.den;
    const std::int64_t capacity = b * unit;
    std::vector<std::int64_t> bucket(s, capacity);
    std::uint32_t cursor = 0;
    TxnId next_id = 0;

    for (Round r = 0; r < rounds; ++r) {
        for (auto& tokens : bucket) tokens = std::min(capacity, tokens + rho.num);
        auto& out = trace.by_round[static_cast<std::size_t>(r)];
        for (;;) {
            const auto& shards = member_shards[cursor];
            const bool ready = std::all_of(shards.begin(), shards.end(),
                                           [&](std::uint32_t x) { return bucket[x] >= unit; });
            if (!ready) break;
            Injection inj;
            inj.round = r;
            inj.home = ShardId{shards.front()};
            for (auto x : shards) {
                inj.accounts.push_back(layout.account_of(ShardId{x}, 0));
                bucket[x] -= unit;
            }
            out.push_back(std::move(inj));
            cursor = (cursor + 1) % width;
        }
        assign_ids(out, next_id);
    }
    return trace;
}

AdmissibilityResult check_admissible(const InjectionTrace& trace, Rational rho, std::int64_t b) {
    AdmissibilityResult result;
    const auto congestion = trace.congestion();
    const auto rounds = congestion.size();
    const std::int64_t budget = b * rho.den;

    for (std::uint32_t s = 0; s < trace.shards; ++s) {
        // q[j] = den * P[j] - num * j, P = prefix congestion; the interval [x, y]
        // is admissible iff q[y+1] - q[x] <= b * den (the floor drops out since
        // congestion and b are integers).
        std::vector<std::int64_t> q(rounds + 1, 0);
        std::int64_t prefix = 0;
        for (std::size_t j = 0; j < rounds; ++j) {
            prefix += congestion[j][s];
            q[j + 1] = rho.den * prefix - rho.num * static_cast<std::int64_t>(j + 1);
        }
        std::int64_t running_min = q[0];
        for (std::size_t y = 0; y < rounds; ++y) {
            running_min = std::min(running_min, q[y]);
            if (q[y + 1] - running_min <= budget) continue;
            std::size_t x = y;
            while (q[y + 1] - q[x] <= budget) --x;
            AdmissibilityViolation v;
            v.shard = ShardId{s};
            v.first = static_cast<Round>(x);
            v.last = static_cast<Round>(y);
            std::int64_t count = 0;
            for (std::size_t j = x; j <= y; ++j) count += congestion[j][s];
            v.congestion = count;
            v.allowed = rho.floor_times(static_cast<std::int64_t>(y - x + 1)) + b;
            const bool better = !result.violation || v.last < result.violation->last ||
                                (v.last == result.violation->last &&
                                 v.last - v.first < result.violation->last - result.violation->first);
            if (better) result.violation = v;
            break;
        }
    }
    result.admissible = !result.violation.has_value();
    return result;
}

void write_trace(std::ostream& out, const InjectionTrace& trace) {
    out << "# shards " << trace.shards << " accounts_per_shard " << trace.accounts_per_shard << " rounds "
        << trace.rounds() << '\n';
    for (const auto& round : trace.by_round) {
        for (const auto& inj : round) {
            out << inj.round << ' ' << inj.id << ' ' << (inj.home.index + 1) << ' ';
            for (std::size_t i = 0; i < inj.accounts.size(); ++i) {
                if (i) out << ',';
                out << inj.accounts[i].id;
            }
            out << '\n';
        }
    }
}

InjectionTrace read_trace(std::istream& in) {
    InjectionTrace trace;
    bool have_header = false;
    Round declared_rounds = -1;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("trace line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            std::istringstream header{std::string(view.substr(1))};
            std::string key;
            while (header >> key) {
                std::int64_t value = 0;
                if (!(header >> value)) fail("malformed header");
                if (key == "shards") trace.shards = static_cast<std::uint32_t>(value);
                else if (key == "accounts_per_shard") trace.accounts_per_shard = static_cast<std::uint32_t>(value);
                else if (key == "rounds") declared_rounds = value;
            }
            have_header = true;
            continue;
        }
        if (!have_header) fail("missing '# shards ...' header");
        std::istringstream fields{std::string(view)};
        Round round = 0;
        TxnId id = 0;
        std::int64_t home = 0;
        std::string accounts;
        if (!(fields >> round >> id >> home >> accounts)) fail("expected 'round txn_id home_shard accounts'");
        if (round < 0) fail("negative round");
        if (home < 1 || home > trace.shards) fail("home shard out of range");
        Injection inj;
        inj.round = round;
        inj.id = id;
        inj.home = ShardId{static_cast<std::uint32_t>(home - 1)};
        std::string_view rest = accounts;
        while (!rest.empty()) {
            auto comma = rest.find(',');
            auto token = rest.substr(0, comma);
            auto acct = parse_int(token, "account id");
            if (acct < 0) fail("negative account id");
            inj.accounts.push_back(trace.layout().account(static_cast<std::uint32_t>(acct)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (inj.accounts.empty()) fail("transaction with no accounts");
        normalize_accounts(inj.accounts);
        if (trace.by_round.size() <= static_cast<std::size_t>(round)) {
            trace.by_round.resize(static_cast<std::size_t>(round) + 1);
        }
        trace.by_round[static_cast<std::size_t>(round)].push_back(std::move(inj));
    }
    if (declared_rounds > trace.rounds()) trace.by_round.resize(static_cast<std::size_t>(declared_rounds));
    return trace;
}

}  // namespace shard_sched

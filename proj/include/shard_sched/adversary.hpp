#pragma once

#include "shard_sched/core.hpp"

#include <iosfwd>
#include <string_view>

namespace shard_sched {

/// Exact non-negative rational, used for injection rates so that bound
/// preconditions such as rho = 1/144 are expressible without rounding.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d);

    /// Accepts "3/5", "0.15" and "1" (decimals are converted exactly).
    static Rational parse(std::string_view text);

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;
    /// floor(this * t) for t >= 0.
    std::int64_t floor_times(std::int64_t t) const;

    friend bool operator==(const Rational& a, const Rational& b) { return a.num * b.den == b.num * a.den; }
    friend auto operator<=>(const Rational& a, const Rational& b) {
        return (a.num * b.den) <=> (b.num * a.den);
    }
};

enum class Strategy : std::uint8_t { uniform_random, single_epoch_burst };

const char* to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

struct AdversaryParams {
    Rational rho{1, 10};
    std::int64_t b = 1;
    std::uint32_t k = 1;
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::uniform_random;
    /// First round of the burst window (single_epoch_burst only).
    Round burst_round = 1000;
    /// Length of the burst window in rounds.
    Round burst_rounds = 1;
    std::uint32_t accounts_per_shard = 1;

    /// Throws std::invalid_argument when a field is out of range.
    void validate(std::uint32_t shards) const;
};

struct Injection {
    Round round = 0;
    TxnId id = 0;
    ShardId home;
    std::vector<AccountId> accounts;
};

/// Per-round injections; ids are globally monotone in injection order.
struct InjectionTrace {
    std::uint32_t shards = 1;
    std::uint32_t accounts_per_shard = 1;
    std::vector<std::vector<Injection>> by_round;

    Round rounds() const { return static_cast<Round>(by_round.size()); }
    std::size_t size() const;
    AccountLayout layout() const { return {shards, accounts_per_shard}; }
    /// Number of injected transactions accessing each shard at each round, [round][shard].
    std::vector<std::vector<std::uint32_t>> congestion() const;
    Transaction transaction(const Injection& inj) const;
};

/// Saturating (rho, b) adversary. Every shard holds a token bucket of capacity
/// b refilled by rho each round; a transaction consumes one token on each shard
/// it accesses. uniform_random drains the buckets every round (so the first
/// round carries a full burst); single_epoch_burst keeps the steady rate rho
/// and releases the accumulated b only inside the burst window.
InjectionTrace token_bucket_generator(const AdversaryParams& params, std::uint32_t shards, Round rounds);

/// Number of mutually conflicting transactions per batch in the instability
/// construction: k+1 when k(k+1)/2 <= s, else p+1 for the largest p with p(p+1)/2 <= s.
std::uint32_t theorem1_width(std::uint32_t k, std::uint32_t s);

/// Rotating batches of theorem1_width(k, s) transactions in which every pair
/// shares a private shard, fed through the same (rho, b) token buckets.
/// A non-zero seed relabels the shards with a random permutation.
/// Throws std::invalid_argument when s < 1 or the construction needs more shards than s.
InjectionTrace theorem1_adversary(std::uint32_t k, std::uint32_t s, Rational rho, std::int64_t b, Round rounds,
                                  std::uint64_t seed = 0);

struct AdmissibilityViolation {
    ShardId shard;
    Round first = 0;  // inclusive
    Round last = 0;   // inclusive
    std::int64_t congestion = 0;
    std::int64_t allowed = 0;
};

struct AdmissibilityResult {
    bool admissible = true;
    std::optional<AdmissibilityViolation> violation;
};

/// Checks congestion(shard, [x, y]) <= floor(rho * (y - x + 1)) + b for every
/// shard and interval. Reports the violation with the earliest end round, then
/// the shortest such interval, then the lowest shard.
AdmissibilityResult check_admissible(const InjectionTrace& trace, Rational rho, std::int64_t b);

/// Line format: "round txn_id home_shard acct_1,...,acct_m" with 1-based shard
/// numbers and 0-based account ids. A header comment fixes the layout:
/// "# shards <s> accounts_per_shard <a> rounds <T>".
void write_trace(std::ostream& out, const InjectionTrace& trace);
InjectionTrace read_trace(std::istream& in);

}  // namespace shard_sched

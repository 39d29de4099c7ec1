#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace shard_sched {

using Round = std::int64_t;
using TxnId = std::uint64_t;

/// A shard. Stored 0-based; rendered as S1..Ss in every file format and log.
struct ShardId {
    std::uint32_t index = 0;

    auto operator<=>(const ShardId&) const = default;
    std::string name() const { return "S" + std::to_string(index + 1); }
};

/// An account and the shard that owns it. Owner sets are disjoint by construction.
struct AccountId {
    std::uint32_t id = 0;
    ShardId owner;

    auto operator<=>(const AccountId&) const = default;
};

/// Maps account ids onto shards: account `id` is owned by shard `id / per_shard`.
struct AccountLayout {
    std::uint32_t shards = 1;
    std::uint32_t per_shard = 1;

    std::uint32_t total() const { return shards * per_shard; }
    AccountId account(std::uint32_t id) const;
    AccountId account_of(ShardId shard, std::uint32_t slot) const;
};

enum class TxnStatus : std::uint8_t { pending, scheduled, committed, aborted };

const char* to_string(TxnStatus status);

struct SubTransaction {
    TxnId parent = 0;
    ShardId destination;
    std::vector<AccountId> accounts;
    bool condition_ok = true;
    bool valid = true;

    bool votes_commit() const { return condition_ok && valid; }
};

struct Transaction {
    TxnId id = 0;
    ShardId home;
    std::vector<AccountId> accounts;  // sorted, unique
    Round injection_round = 0;
    TxnStatus status = TxnStatus::pending;
    std::optional<Round> commit_round;

    /// Distinct owner shards of the accessed accounts, ascending.
    std::vector<ShardId> shards() const;
    bool finished() const {
        return status == TxnStatus::committed || status == TxnStatus::aborted;
    }
    bool conflicts_with(const Transaction& other) const;
};

/// Sorts and dedups an account list in place.
void normalize_accounts(std::vector<AccountId>& accounts);

/// One subtransaction per distinct destination shard, in shard order.
/// Throws std::invalid_argument when the transaction accesses no account.
std::vector<SubTransaction> split(const Transaction& txn);

struct LedgerEntry {
    TxnId txn = 0;
    Round round = 0;

    bool operator==(const LedgerEntry&) const = default;
};

/// Append-only local chain of one shard.
class Ledger {
public:
    explicit Ledger(ShardId shard) : shard_(shard) {}

    /// Throws std::logic_error if `round` precedes the last entry.
    void append(TxnId txn, Round round);

    ShardId shard() const { return shard_; }
    std::span<const LedgerEntry> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    ShardId shard_;
    std::vector<LedgerEntry> entries_;
};

/// Functional form of Ledger::append.
Ledger ledger_append(Ledger ledger, TxnId txn, Round round);

/// Undirected conflict graph over transactions. Vertex order follows the
/// input order of build_conflict_graph; adjacency lists are sorted.
class ConflictGraph {
public:
    ConflictGraph() = default;
    ConflictGraph(std::vector<TxnId> vertices, std::vector<std::vector<std::uint32_t>> adjacency);

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const;
    TxnId txn(std::uint32_t vertex) const { return vertices_[vertex]; }
    std::span<const TxnId> vertices() const { return vertices_; }
    std::span<const std::uint32_t> neighbors(std::uint32_t vertex) const { return adjacency_[vertex]; }
    std::optional<std::uint32_t> index_of(TxnId txn) const;
    bool has_edge(TxnId a, TxnId b) const;
    std::uint32_t degree(std::uint32_t vertex) const {
        return static_cast<std::uint32_t>(adjacency_[vertex].size());
    }
    /// Maximum degree; 0 for an empty graph.
    std::uint32_t max_degree() const;
    /// Edges as (u, v) vertex-index pairs with u < v.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

private:
    std::vector<TxnId> vertices_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
};

/// Two transactions conflict iff they share an account (all accesses are writes).
/// Throws std::invalid_argument on duplicate transaction ids.
ConflictGraph build_conflict_graph(std::span<const Transaction> txns);
ConflictGraph build_conflict_graph(std::span<const Transaction* const> txns);

}  // namespace shard_sched

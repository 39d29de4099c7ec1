#include "shard_sched/core.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace shard_sched {

AccountId AccountLayout::account(std::uint32_t id) const {
    if (id >= total()) {
        throw std::out_of_range("account id " + std::to_string(id) + " outside layout of " +
                                std::to_string(total()) + " accounts");
    }
    return AccountId{id, ShardId{id / per_shard}};
}

AccountId AccountLayout::account_of(ShardId shard, std::uint32_t slot) const {
    return account(shard.index * per_shard + slot);
}

const char* to_string(TxnStatus status) {
    switch (status) {
        case TxnStatus::pending: return "pending";
        case TxnStatus::scheduled: return "scheduled";
        case TxnStatus::committed: return "committed";
        case TxnStatus::aborted: return "aborted";
    }
    return "?";
}

std::vector<ShardId> Transaction::shards() const {
    std::vector<ShardId> out;
    out.reserve(accounts.size());
    for (const auto& a : accounts) out.push_back(a.owner);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool Transaction::conflicts_with(const Transaction& other) const {
    // both lists sorted by (id, owner)
    auto a = accounts.begin();
    auto b = other.accounts.begin();
    while (a != accounts.end() && b != other.accounts.end()) {
        if (a->id == b->id) return true;
        if (a->id < b->id) ++a; else ++b;
    }
    return false;
}

void normalize_accounts(std::vector<AccountId>& accounts) {
    std::sort(accounts.begin(), accounts.end());
    accounts.erase(std::unique(accounts.begin(), accounts.end()), accounts.end());
}

std::vector<SubTransaction> split(const Transaction& txn) {
    if (txn.accounts.empty()) {
        throw std::invalid_argument("transaction " + std::to_string(txn.id) + " accesses no account");
    }
    std::vector<SubTransaction> subs;
    for (const auto& shard : txn.shards()) {
        SubTransaction sub;
        sub.parent = txn.id;
        sub.destination = shard;
        for (const auto& a : txn.accounts) {
            if (a.owner == shard) sub.accounts.push_back(a);
        }
        subs.push_back(std::move(sub));
    }
    return subs;
}

void Ledger::append(TxnId txn, Round round) {
    if (!entries_.empty() && round < entries_.back().round) {
        throw std::logic_error("ledger " + shard_.name() + ": append at round " + std::to_string(round) +
                               " precedes last entry at round " + std::to_string(entries_.back().round));
    }
    entries_.push_back({txn, round});
}

Ledger ledger_append(Ledger ledger, TxnId txn, Round round) {
    ledger.append(txn, round);
    return ledger;
}

ConflictGraph::ConflictGraph(std::vector<TxnId> vertices, std::vector<std::vector<std::uint32_t>> adjacency)
    : vertices_(std::move(vertices)), adjacency_(std::move(adjacency)) {}

std::size_t ConflictGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& adj : adjacency_) twice += adj.size();
    return twice / 2;
}

std::optional<std::uint32_t> ConflictGraph::index_of(TxnId txn) const {
    auto it = std::find(vertices_.begin(), vertices_.end(), txn);
    if (it == vertices_.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it - vertices_.begin());
}

bool ConflictGraph::has_edge(TxnId a, TxnId b) const {
    auto ia = index_of(a);
    auto ib = index_of(b);
    if (!ia || !ib) return false;
    const auto& adj = adjacency_[*ia];
    return std::binary_search(adj.begin(), adj.end(), *ib);
}

std::uint32_t ConflictGraph::max_degree() const {
    std::uint32_t best = 0;
    for (const auto& adj : adjacency_) best = std::max(best, static_cast<std::uint32_t>(adj.size()));
    return best;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> ConflictGraph::edges() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t u = 0; u < adjacency_.size(); ++u) {
        for (auto v : adjacency_[u]) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

ConflictGraph build_conflict_graph(std::span<const Transaction* const> txns) {
    std::vector<TxnId> vertices;
    vertices.reserve(txns.size());
    std::unordered_set<TxnId> seen;
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> by_account;
    for (std::uint32_t v = 0; v < txns.size(); ++v) {
        if (!seen.insert(txns[v]->id).second) {
            throw std::invalid_argument("duplicate transaction id " + std::to_string(txns[v]->id));
        }
        vertices.push_back(txns[v]->id);
        for (const auto& a : txns[v]->accounts) by_account[a.id].push_back(v);
    }
    std::vector<std::vector<std::uint32_t>> adjacency(txns.size());
    for (auto& [account, users] : by_account) {
        for (std::size_t i = 0; i < users.size(); ++i) {
            for (std::size_t j = i + 1; j < users.size(); ++j) {
                adjacency[users[i]].push_back(users[j]);
                adjacency[users[j]].push_back(users[i]);
            }
        }
    }
    for (auto& adj : adjacency) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    return ConflictGraph(std::move(vertices), std::move(adjacency));
}

ConflictGraph build_conflict_graph(std::span<const Transaction> txns) {
    std::vector<const Transaction*> ptrs;
    ptrs.reserve(txns.size());
    for (const auto& t : txns) ptrs.push_back(&t);
    return build_conflict_graph(std::span<const Transaction* const>(ptrs));
}

}  // namespace shard_sched

#include "shard_sched/world.hpp"

namespace shard_sched {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

bool OutcomeModel::votes_commit(TxnId txn, ShardId shard, std::uint32_t attempt) const {
    if (abort_prob <= 0.0) return true;
    if (abort_prob >= 1.0) return false;
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ txn);
    h = splitmix(h ^ (static_cast<std::uint64_t>(shard.index) << 32 | attempt));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u >= abort_prob;
}

World::World(std::uint32_t shards, OutcomeModel outcomes) : outcomes_(outcomes), by_home_(shards, 0) {
    if (shards < 1) throw std::invalid_argument("a world needs at least one shard");
    for (std::uint32_t i = 0; i < shards; ++i) ledgers_.emplace_back(ShardId{i});
}

Transaction& World::add(Transaction txn) {
    if (txn.home.index >= shards()) throw std::invalid_argument("home shard out of range for txn " + std::to_string(txn.id));
    for (const auto& a : txn.accounts) {
        if (a.owner.index >= shards()) {
            throw std::invalid_argument("account owner out of range for txn " + std::to_string(txn.id));
        }
    }
    if (!index_.emplace(txn.id, txns_.size()).second) {
        throw std::invalid_argument("duplicate txn id " + std::to_string(txn.id));
    }
    ++unfinished_;
    ++by_home_[txn.home.index];
    txns_.push_back(std::move(txn));
    attempts_.push_back(0);
    return txns_.back();
}

std::size_t World::index(TxnId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::logic_error("unknown txn " + std::to_string(id));
    return it->second;
}

Transaction& World::txn(TxnId id) { return txns_[index(id)]; }
const Transaction& World::txn(TxnId id) const { return txns_[index(id)]; }

bool World::vote(TxnId id, ShardId shard) const { return outcomes_.votes_commit(id, shard, attempts_[index(id)]); }

void World::commit(TxnId id, Round round) {
    auto& t = txn(id);
    if (t.finished()) throw std::logic_error("txn " + std::to_string(id) + " finished twice");
    for (auto s : t.shards()) ledgers_[s.index].append(id, round);
    t.status = TxnStatus::committed;
    t.commit_round = round;
    ++committed_;
    --unfinished_;
    --by_home_[t.home.index];
}

void World::abort(TxnId id, Round round) {
    auto& t = txn(id);
    if (t.finished()) throw std::logic_error("txn " + std::to_string(id) + " finished twice");
    t.status = TxnStatus::aborted;
    t.commit_round = round;
    ++aborted_;
    --unfinished_;
    --by_home_[t.home.index];
}

void World::retry(TxnId id) {
    const auto i = index(id);
    auto& t = txns_[i];
    if (t.status != TxnStatus::aborted) throw std::logic_error("only aborted transactions can be retried");
    t.status = TxnStatus::pending;
    t.commit_round.reset();
    ++attempts_[i];
    --aborted_;
    ++unfinished_;
    ++by_home_[t.home.index];
}

const char* to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::txn_to_leader: return "txn_to_leader";
        case MessageKind::colored_txn: return "colored_txn";
        case MessageKind::subtxn: return "subtxn";
        case MessageKind::vote: return "vote";
        case MessageKind::confirm: return "confirm";
    }
    return "?";
}

void Transport::send(Message m) {
    m.deliver_round = m.send_round + topology_->distance(m.src, m.dst);
    queue_[m.deliver_round].push_back(m);
    ++pending_;
}

std::vector<Message> Transport::deliver(Round r) {
    std::vector<Message> out;
    while (!queue_.empty() && queue_.begin()->first <= r) {
        if (queue_.begin()->first < r) throw std::logic_error("message due at an earlier round was never delivered");
        auto& batch = queue_.begin()->second;
        out.insert(out.end(), batch.begin(), batch.end());
        queue_.erase(queue_.begin());
    }
    pending_ -= out.size();
    return out;
}

}  // namespace shard_sched

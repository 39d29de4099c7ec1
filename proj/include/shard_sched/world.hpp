#pragma once

#include "shard_sched/core.hpp"
#include "shard_sched/topology.hpp"

#include <deque>
#include <map>
#include <unordered_map>

namespace shard_sched {

/// Simulated condition checks. A subtransaction votes abort with probability
/// abort_prob, decided by a hash of (seed, txn, shard, attempt).
struct OutcomeModel {
    std::uint64_t seed = 0;
    double abort_prob = 0.0;

    bool votes_commit(TxnId txn, ShardId shard, std::uint32_t attempt) const;
};

/// Transactions and ledgers of one run. Schedulers decide when things finish;
/// the world records it.
class World {
public:
    World(std::uint32_t shards, OutcomeModel outcomes);

    std::uint32_t shards() const { return static_cast<std::uint32_t>(ledgers_.size()); }

    /// Throws std::invalid_argument on a duplicate id or a shard out of range.
    Transaction& add(Transaction txn);
    Transaction& txn(TxnId id);
    const Transaction& txn(TxnId id) const;
    const std::deque<Transaction>& transactions() const { return txns_; }

    /// Vote of the subtransaction of `id` at `shard` for the current attempt.
    bool vote(TxnId id, ShardId shard) const;

    /// Appends `id` to the ledger of each of its shards.
    void commit(TxnId id, Round round);
    void abort(TxnId id, Round round);
    /// Back to pending after an abort; the next attempt draws fresh outcomes.
    void retry(TxnId id);

    std::span<const Ledger> ledgers() const { return ledgers_; }
    std::uint64_t committed() const { return committed_; }
    std::uint64_t aborted() const { return aborted_; }
    std::uint64_t unfinished() const { return unfinished_; }
    /// Unfinished transactions per home shard.
    std::span<const std::uint32_t> unfinished_by_home() const { return by_home_; }

private:
    std::size_t index(TxnId id) const;

    OutcomeModel outcomes_;
    std::deque<Transaction> txns_;
    std::vector<std::uint32_t> attempts_;
    std::unordered_map<TxnId, std::size_t> index_;
    std::vector<Ledger> ledgers_;
    std::vector<std::uint32_t> by_home_;
    std::uint64_t committed_ = 0;
    std::uint64_t aborted_ = 0;
    std::uint64_t unfinished_ = 0;
};

/// Driven once per round by the engine.
class Scheduler {
public:
    virtual ~Scheduler() = default;
    /// All scheduler work of round r; runs before that round's injections.
    virtual void step(Round r) = 0;
    /// Hands over a transaction injected at the end of the current round.
    virtual void inject(TxnId id) = 0;
    /// Transactions whose commit protocol has started and not yet finished.
    virtual std::size_t in_flight() const = 0;
};

enum class MessageKind : std::uint8_t { txn_to_leader, colored_txn, subtxn, vote, confirm };

const char* to_string(MessageKind kind);

struct Message {
    MessageKind kind = MessageKind::txn_to_leader;
    TxnId txn = 0;
    ShardId src;
    ShardId dst;
    Round send_round = 0;
    Round deliver_round = 0;
    // payload, meaning depends on kind
    std::uint32_t cluster = 0;
    std::uint32_t color = 0;
    Round t_end = 0;
    Round apply_round = 0;
    bool commit = true;
};

/// Point-to-point delivery after exactly dist(src, dst) rounds; FIFO among
/// messages due in the same round.
class Transport {
public:
    explicit Transport(const Topology& topology) : topology_(&topology) {}

    /// Sets deliver_round = send_round + distance and queues the message.
    void send(Message m);
    /// Removes and returns every message due at or before `r`, in send order.
    /// Throws std::logic_error if a message was due before `r` (it was missed).
    std::vector<Message> deliver(Round r);
    std::size_t pending() const { return pending_; }

private:
    const Topology* topology_;
    std::map<Round, std::vector<Message>> queue_;
    std::size_t pending_ = 0;
};

}  // namespace shard_sched

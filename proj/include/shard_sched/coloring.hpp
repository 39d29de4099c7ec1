#pragma once

#include "shard_sched/core.hpp"

#include <string_view>

namespace shard_sched {

enum class ColoringStrategy : std::uint8_t { greedy, heavy_light };

const char* to_string(ColoringStrategy strategy);
ColoringStrategy parse_coloring(std::string_view text);

/// Color per vertex index of the colored graph.
struct Coloring {
    std::vector<std::uint32_t> color;
    std::uint32_t num_colors = 0;
};

/// Greedy coloring: vertices are visited in `order` and take the smallest
/// color not used by an already-colored neighbor.
/// Throws std::invalid_argument if `order` is not a permutation of the vertices.
Coloring greedy_color(const ConflictGraph& graph, std::span<const std::uint32_t> order);

/// Greedy coloring in ascending transaction id order.
Coloring greedy_color(const ConflictGraph& graph);

/// Heavy vertices (accessing more than `heavy_threshold` shards) get unique
/// colors 0..h-1; the light subgraph is then greedily colored from h upward,
/// in ascending transaction id order.
Coloring heavy_light_color(const ConflictGraph& graph, std::span<const std::uint32_t> shards_accessed,
                           std::uint32_t heavy_threshold);

bool is_proper(const ConflictGraph& graph, const Coloring& coloring);

/// Same result as greedy_color over build_conflict_graph(txns) with the
/// identity order, computed from per-account color bitsets instead of an
/// explicit edge list. This is what the schedulers use on large epochs.
std::vector<std::uint32_t> greedy_color_by_accounts(std::span<const Transaction* const> txns);

/// Account-based form of heavy_light_color: transactions touching more than
/// `heavy_threshold` shards get unique colors in input order, the rest are
/// greedily colored above them.
std::vector<std::uint32_t> heavy_light_color_by_accounts(std::span<const Transaction* const> txns,
                                                         std::uint32_t heavy_threshold);

/// Dispatches to greedy_color_by_accounts or heavy_light_color_by_accounts
/// (threshold ceil(sqrt(s))).
std::vector<std::uint32_t> color_transactions(std::span<const Transaction* const> txns, ColoringStrategy strategy,
                                              std::uint32_t shards);

/// ceil(sqrt(s)) for s >= 0, exact on integers.
std::uint32_t ceil_sqrt(std::uint32_t s);

}  // namespace shard_sched

#include "shard_sched/coloring.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <numeric>
#include <unordered_map>

namespace shard_sched {

namespace {

void color_in_order(const ConflictGraph& graph, std::span<const std::uint32_t> order, Coloring& out,
                    std::uint32_t base, const std::vector<bool>* skip) {
    constexpr auto uncolored = static_cast<std::uint32_t>(-1);
    std::vector<char> used;
    for (auto v : order) {
        if (skip && (*skip)[v]) continue;
        used.assign(graph.degree(v) + 1, 0);
        for (auto u : graph.neighbors(v)) {
            const auto c = out.color[u];
            if (c == uncolored || c < base) continue;
            if (c - base < used.size()) used[c - base] = 1;
        }
        std::uint32_t c = 0;
        while (used[c]) ++c;
        out.color[v] = base + c;
        out.num_colors = std::max(out.num_colors, base + c + 1);
    }
}

}  // namespace

Coloring greedy_color(const ConflictGraph& graph, std::span<const std::uint32_t> order) {
    const auto n = graph.vertex_count();
    if (order.size() != n) throw std::invalid_argument("coloring order must list every vertex once");
    std::vector<bool> seen(n, false);
    for (auto v : order) {
        if (v >= n || seen[v]) throw std::invalid_argument("coloring order must list every vertex once");
        seen[v] = true;
    }
    Coloring out;
    out.color.assign(n, static_cast<std::uint32_t>(-1));
    color_in_order(graph, order, out, 0, nullptr);
    assert(is_proper(graph, out));
    return out;
}

Coloring greedy_color(const ConflictGraph& graph) {
    std::vector<std::uint32_t> order(graph.vertex_count());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return graph.txn(a) < graph.txn(b); });
    return greedy_color(graph, order);
}

Coloring heavy_light_color(const ConflictGraph& graph, std::span<const std::uint32_t> shards_accessed,
                           std::uint32_t heavy_threshold) {
    const auto n = graph.vertex_count();
    if (shards_accessed.size() != n) throw std::invalid_argument("shards_accessed must have one entry per vertex");
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return graph.txn(a) < graph.txn(b); });

    Coloring out;
    out.color.assign(n, static_cast<std::uint32_t>(-1));
    std::vector<bool> heavy(n, false);
    std::uint32_t next = 0;
    for (auto v : order) {
        if (shards_accessed[v] > heavy_threshold) {
            heavy[v] = true;
            out.color[v] = next++;
        }
    }
    out.num_colors = next;
    color_in_order(graph, order, out, next, &heavy);
    assert(is_proper(graph, out));
    return out;
}

bool is_proper(const ConflictGraph& graph, const Coloring& coloring) {
    if (coloring.color.size() != graph.vertex_count()) return false;
    for (auto [u, v] : graph.edges()) {
        if (coloring.color[u] == coloring.color[v]) return false;
    }
    return true;
}

std::vector<std::uint32_t> greedy_color_by_accounts(std::span<const Transaction* const> txns) {
    // Per-account bitset of colors already taken by earlier transactions.
    std::unordered_map<std::uint32_t, std::vector<std::uint64_t>> taken;
    std::vector<std::uint32_t> colors;
    colors.reserve(txns.size());
    std::vector<const std::vector<std::uint64_t>*> sets;
    for (const auto* txn : txns) {
        sets.clear();
        std::size_t words = 0;
        for (const auto& a : txn->accounts) {
            auto it = taken.find(a.id);
            if (it == taken.end()) continue;
            sets.push_back(&it->second);
            words = std::max(words, it->second.size());
        }
        std::uint32_t color = static_cast<std::uint32_t>(words * 64);
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t merged = 0;
            for (const auto* set : sets) {
                if (w < set->size()) merged |= (*set)[w];
            }
            if (merged != ~std::uint64_t{0}) {
                color = static_cast<std::uint32_t>(w * 64 + std::countr_one(merged));
                break;
            }
        }
        for (const auto& a : txn->accounts) {
            auto& bits = taken[a.id];
            if (bits.size() <= color / 64) bits.resize(color / 64 + 1, 0);
            bits[color / 64] |= std::uint64_t{1} << (color % 64);
        }
        colors.push_back(color);
    }
    return colors;
}

std::vector<std::uint32_t> heavy_light_color_by_accounts(std::span<const Transaction* const> txns,
                                                         std::uint32_t heavy_threshold) {
    std::vector<std::uint32_t> colors(txns.size(), 0);
    std::vector<const Transaction*> light;
    std::vector<std::size_t> light_pos;
    std::uint32_t heavy = 0;
    for (std::size_t i = 0; i < txns.size(); ++i) {
        if (txns[i]->shards().size() > heavy_threshold) {
            colors[i] = heavy++;
        } else {
            light.push_back(txns[i]);
            light_pos.push_back(i);
        }
    }
    const auto light_colors = greedy_color_by_accounts(light);
    for (std::size_t j = 0; j < light.size(); ++j) colors[light_pos[j]] = heavy + light_colors[j];
    return colors;
}

const char* to_string(ColoringStrategy strategy) {
    return strategy == ColoringStrategy::greedy ? "greedy" : "heavy_light";
}

ColoringStrategy parse_coloring(std::string_view text) {
    if (text == "greedy") return ColoringStrategy::greedy;
    if (text == "heavy_light") return ColoringStrategy::heavy_light;
    throw std::invalid_argument("unknown coloring strategy '" + std::string(text) + "'");
}

std::vector<std::uint32_t> color_transactions(std::span<const Transaction* const> txns, ColoringStrategy strategy,
                                              std::uint32_t shards) {
    if (strategy == ColoringStrategy::heavy_light) return heavy_light_color_by_accounts(txns, ceil_sqrt(shards));
    return greedy_color_by_accounts(txns);
}

std::uint32_t ceil_sqrt(std::uint32_t s) {
    std::uint32_t r = 0;
    while (static_cast<std::uint64_t>(r) * r < s) ++r;
    return r;
}

}  // namespace shard_sched

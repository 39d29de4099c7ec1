#pragma once

#include "shard_sched/core.hpp"

#include <iosfwd>

namespace shard_sched {

/// Shard distance matrix in rounds.
class Topology {
public:
    enum class Kind : std::uint8_t { uniform, line, explicit_matrix };

    static Topology line(std::uint32_t s);
    static Topology uniform(std::uint32_t s);
    /// Full symmetric matrix, row-major. Validates zero diagonal, positive
    /// off-diagonal entries, symmetry and the triangle inequality.
    static Topology from_matrix(std::uint32_t s, std::vector<std::uint32_t> dist);

    std::uint32_t shards() const { return s_; }
    std::uint32_t distance(ShardId a, ShardId b) const { return dist_[a.index * s_ + b.index]; }
    std::uint32_t diameter() const { return diameter_; }
    Kind kind() const { return kind_; }
    bool is_uniform() const;
    /// True when distances equal |i - j| (also for matrices that happen to be lines).
    bool is_line() const;

private:
    Topology(std::uint32_t s, std::vector<std::uint32_t> dist, Kind kind);

    std::uint32_t s_ = 0;
    std::vector<std::uint32_t> dist_;
    std::uint32_t diameter_ = 0;
    Kind kind_ = Kind::explicit_matrix;
};

/// Text format: first line `s`, then `uniform`, `line`, or s-1 rows of the
/// strictly lower triangle (row i holds distances to shards 1..i-1).
Topology read_topology(std::istream& in);
Topology load_topology(const std::string& path);

struct ClusterRef {
    std::uint32_t layer = 0;
    std::uint32_t sublayer = 0;
    std::uint32_t index = 0;

    auto operator<=>(const ClusterRef&) const = default;
};

struct Cluster {
    ClusterRef ref;
    std::vector<ShardId> members;  // ascending
    std::optional<ShardId> leader;
    std::uint32_t diameter = 0;    // strong diameter in rounds

    bool contains(ShardId s) const;
};

/// Layered clusters; clusters of one (layer, sublayer) partition the shards.
class ClusterHierarchy {
public:
    ClusterHierarchy(std::uint32_t shards, std::vector<std::vector<std::vector<Cluster>>> layers);

    std::uint32_t shards() const { return shards_; }
    std::uint32_t layers() const { return static_cast<std::uint32_t>(layers_.size()); }
    std::uint32_t sublayers(std::uint32_t layer) const { return static_cast<std::uint32_t>(layers_[layer].size()); }
    /// Largest sublayer count over all layers.
    std::uint32_t max_sublayers() const;
    std::span<const Cluster> clusters(std::uint32_t layer, std::uint32_t sublayer) const {
        return layers_[layer][sublayer];
    }
    const Cluster& cluster(ClusterRef ref) const { return layers_[ref.layer][ref.sublayer][ref.index]; }
    /// The cluster of (layer, sublayer) that contains `s`.
    const Cluster& cluster_of(ShardId s, std::uint32_t layer, std::uint32_t sublayer) const;
    /// Dense id for per-cluster tables, in (layer, sublayer, index) order.
    std::uint32_t flat_index(ClusterRef ref) const;
    std::uint32_t cluster_count() const { return static_cast<std::uint32_t>(flat_offset_.back()); }

private:
    std::uint32_t shards_;
    std::vector<std::vector<std::vector<Cluster>>> layers_;
    std::vector<std::vector<std::vector<std::uint32_t>>> membership_;  // [layer][sublayer][shard] -> index
    std::vector<std::uint32_t> flat_offset_;                           // per (layer, sublayer), plus total
    std::vector<std::uint32_t> layer_offset_;
};

/// Number of layers of the line decomposition: ceil(log2 D) + 1, at least 2
/// when s >= 2 so that singletons and the all-shard cluster are distinct.
std::uint32_t line_layer_count(std::uint32_t s);

/// Line decomposition. Layer 0: singletons. Layer i (0 < i < top): sublayer 0
/// is aligned blocks of 2^i shards; sublayer 1 is the same blocks shifted right
/// by 2^(i-1), whose truncated end blocks get no leader. Top layer: one cluster
/// of all shards. Leaders are the lower midpoint of their block.
ClusterHierarchy line_cluster_hierarchy(const Topology& topology);

/// Singletons plus one all-shard cluster led by a minimum-eccentricity shard.
/// Used for topologies without a dedicated decomposition.
ClusterHierarchy flat_cluster_hierarchy(const Topology& topology);

/// line_cluster_hierarchy for lines, flat_cluster_hierarchy otherwise.
ClusterHierarchy build_hierarchy(const Topology& topology);

/// Shards within distance `radius` of `center`.
std::vector<ShardId> neighborhood(const Topology& topology, ShardId center, std::uint32_t radius);

/// Lowest (layer, sublayer) cluster with a leader that contains the whole
/// x-neighborhood of `home`, x = max distance from home to a destination.
ClusterRef home_cluster(ShardId home, std::span<const ShardId> destinations, const ClusterHierarchy& hierarchy,
                        const Topology& topology);

/// Largest q such that the leader's q-neighborhood lies inside the cluster;
/// nullopt for leaderless clusters. Clusters spanning everything report the diameter.
std::optional<std::uint32_t> leader_radius(const Cluster& cluster, const Topology& topology);

}  // namespace shard_sched

#include "shard_sched/topology.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace shard_sched {

Topology::Topology(std::uint32_t s, std::vector<std::uint32_t> dist, Kind kind)
    : s_(s), dist_(std::move(dist)), kind_(kind) {
    diameter_ = dist_.empty() ? 0 : *std::max_element(dist_.begin(), dist_.end());
}

Topology Topology::line(std::uint32_t s) {
    if (s < 1) throw std::invalid_argument("line topology needs s >= 1");
    std::vector<std::uint32_t> dist(static_cast<std::size_t>(s) * s);
    for (std::uint32_t i = 0; i < s; ++i) {
        for (std::uint32_t j = 0; j < s; ++j) dist[i * s + j] = i > j ? i - j : j - i;
    }
    return Topology(s, std::move(dist), Kind::line);
}

Topology Topology::uniform(std::uint32_t s) {
    if (s < 1) throw std::invalid_argument("uniform topology needs s >= 1");
    std::vector<std::uint32_t> dist(static_cast<std::size_t>(s) * s, 1);
    for (std::uint32_t i = 0; i < s; ++i) dist[i * s + i] = 0;
    return Topology(s, std::move(dist), Kind::uniform);
}

Topology Topology::from_matrix(std::uint32_t s, std::vector<std::uint32_t> dist) {
    if (s < 1) throw std::invalid_argument("topology needs s >= 1");
    if (dist.size() != static_cast<std::size_t>(s) * s) throw std::invalid_argument("distance matrix must be s x s");
    for (std::uint32_t i = 0; i < s; ++i) {
        if (dist[i * s + i] != 0) throw std::invalid_argument("distance matrix diagonal must be zero");
        for (std::uint32_t j = 0; j < s; ++j) {
            if (i != j && dist[i * s + j] == 0) throw std::invalid_argument("off-diagonal distances must be positive");
            if (dist[i * s + j] != dist[j * s + i]) throw std::invalid_argument("distance matrix must be symmetric");
        }
    }
    for (std::uint32_t i = 0; i < s; ++i) {
        for (std::uint32_t j = 0; j < s; ++j) {
            for (std::uint32_t m = 0; m < s; ++m) {
                if (dist[i * s + j] > dist[i * s + m] + dist[m * s + j]) {
                    throw std::invalid_argument("distance matrix violates the triangle inequality");
                }
            }
        }
    }
    return Topology(s, std::move(dist), Kind::explicit_matrix);
}

bool Topology::is_uniform() const {
    for (std::uint32_t i = 0; i < s_; ++i) {
        for (std::uint32_t j = 0; j < s_; ++j) {
            if (i != j && dist_[i * s_ + j] != 1) return false;
        }
    }
    return true;
}

bool Topology::is_line() const {
    for (std::uint32_t i = 0; i < s_; ++i) {
        for (std::uint32_t j = 0; j < s_; ++j) {
            if (dist_[i * s_ + j] != (i > j ? i - j : j - i)) return false;
        }
    }
    return true;
}

Topology read_topology(std::istream& in) {
    std::int64_t s = 0;
    if (!(in >> s) || s < 1) throw std::invalid_argument("topology file: first token must be a shard count >= 1");
    std::string word;
    if (!(in >> word)) {
        if (s == 1) return Topology::uniform(1);
        throw std::invalid_argument("topology file: expected 'uniform', 'line' or a distance matrix");
    }
    if (word == "uniform") return Topology::uniform(static_cast<std::uint32_t>(s));
    if (word == "line") return Topology::line(static_cast<std::uint32_t>(s));

    const auto n = static_cast<std::uint32_t>(s);
    std::vector<std::uint32_t> dist(static_cast<std::size_t>(n) * n, 0);
    std::istringstream first(word);
    bool used_first = false;
    for (std::uint32_t i = 1; i < n; ++i) {
        for (std::uint32_t j = 0; j < i; ++j) {
            std::int64_t d = 0;
            if (!used_first) {
                if (!(first >> d)) throw std::invalid_argument("topology file: bad distance '" + word + "'");
                used_first = true;
            } else if (!(in >> d)) {
                throw std::invalid_argument("topology file: matrix ends early");
            }
            if (d < 1) throw std::invalid_argument("topology file: distances must be positive");
            dist[i * n + j] = dist[j * n + i] = static_cast<std::uint32_t>(d);
        }
    }
    return Topology::from_matrix(n, std::move(dist));
}

Topology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open topology file '" + path + "'");
    return read_topology(in);
}

bool Cluster::contains(ShardId s) const { return std::binary_search(members.begin(), members.end(), s); }

ClusterHierarchy::ClusterHierarchy(std::uint32_t shards, std::vector<std::vector<std::vector<Cluster>>> layers)
    : shards_(shards), layers_(std::move(layers)) {
    membership_.resize(layers_.size());
    std::uint32_t offset = 0;
    for (std::uint32_t l = 0; l < layers_.size(); ++l) {
        layer_offset_.push_back(static_cast<std::uint32_t>(flat_offset_.size()));
        membership_[l].resize(layers_[l].size());
        for (std::uint32_t j = 0; j < layers_[l].size(); ++j) {
            flat_offset_.push_back(offset);
            offset += static_cast<std::uint32_t>(layers_[l][j].size());
            auto& owner = membership_[l][j];
            owner.assign(shards_, static_cast<std::uint32_t>(-1));
            for (std::uint32_t c = 0; c < layers_[l][j].size(); ++c) {
                auto& cluster = layers_[l][j][c];
                cluster.ref = ClusterRef{l, j, c};
                for (auto m : cluster.members) {
                    if (owner[m.index] != static_cast<std::uint32_t>(-1)) {
                        throw std::invalid_argument("clusters of one sublayer must be disjoint");
                    }
                    owner[m.index] = c;
                }
            }
            if (std::find(owner.begin(), owner.end(), static_cast<std::uint32_t>(-1)) != owner.end()) {
                throw std::invalid_argument("clusters of one sublayer must cover every shard");
            }
        }
    }
    flat_offset_.push_back(offset);
}

std::uint32_t ClusterHierarchy::max_sublayers() const {
    std::uint32_t best = 0;
    for (const auto& layer : layers_) best = std::max(best, static_cast<std::uint32_t>(layer.size()));
    return best;
}

const Cluster& ClusterHierarchy::cluster_of(ShardId s, std::uint32_t layer, std::uint32_t sublayer) const {
    return layers_[layer][sublayer][membership_[layer][sublayer][s.index]];
}

std::uint32_t ClusterHierarchy::flat_index(ClusterRef ref) const {
    return flat_offset_[layer_offset_[ref.layer] + ref.sublayer] + ref.index;
}

std::uint32_t line_layer_count(std::uint32_t s) {
    if (s <= 1) return 1;
    const std::uint32_t diameter = s - 1;
    std::uint32_t log = 0;
    while ((1u << log) < diameter) ++log;
    return std::max<std::uint32_t>(log + 1, 2);
}

namespace {

std::uint32_t strong_diameter(const std::vector<ShardId>& members, const Topology& topology) {
    std::uint32_t d = 0;
    for (auto a : members) {
        for (auto b : members) d = std::max(d, topology.distance(a, b));
    }
    return d;
}

Cluster make_block(std::uint32_t first, std::uint32_t last, bool with_leader, const Topology& topology) {
    Cluster c;
    for (std::uint32_t i = first; i <= last; ++i) c.members.push_back(ShardId{i});
    if (with_leader) c.leader = ShardId{first + (last - first) / 2};
    c.diameter = strong_diameter(c.members, topology);
    return c;
}

std::vector<Cluster> singletons(const Topology& topology) {
    std::vector<Cluster> out;
    for (std::uint32_t i = 0; i < topology.shards(); ++i) out.push_back(make_block(i, i, true, topology));
    return out;
}

}  // namespace

ClusterHierarchy line_cluster_hierarchy(const Topology& topology) {
    if (!topology.is_line()) throw std::invalid_argument("line_cluster_hierarchy needs a line topology");
    const auto s = topology.shards();
    const auto layer_count = line_layer_count(s);
    std::vector<std::vector<std::vector<Cluster>>> layers(layer_count);
    layers[0].push_back(singletons(topology));
    for (std::uint32_t l = 1; l < layer_count; ++l) {
        if (l + 1 == layer_count) {
            layers[l].push_back({make_block(0, s - 1, true, topology)});
            break;
        }
        const std::uint32_t block = 1u << l;
        std::vector<Cluster> aligned;
        for (std::uint32_t first = 0; first < s; first += block) {
            aligned.push_back(make_block(first, std::min(first + block, s) - 1, true, topology));
        }
        std::vector<Cluster> shifted;
        const std::uint32_t shift = block / 2;
        shifted.push_back(make_block(0, std::min(shift, s) - 1, false, topology));
        for (std::uint32_t first = shift; first < s; first += block) {
            const std::uint32_t last = std::min(first + block, s) - 1;
            shifted.push_back(make_block(first, last, last - first + 1 == block, topology));
        }
        layers[l].push_back(std::move(aligned));
        layers[l].push_back(std::move(shifted));
    }
    return ClusterHierarchy(s, std::move(layers));
}

ClusterHierarchy flat_cluster_hierarchy(const Topology& topology) {
    const auto s = topology.shards();
    std::vector<std::vector<std::vector<Cluster>>> layers;
    layers.push_back({singletons(topology)});
    if (s > 1) {
        Cluster all;
        for (std::uint32_t i = 0; i < s; ++i) all.members.push_back(ShardId{i});
        std::uint32_t best = 0;
        std::uint32_t best_ecc = static_cast<std::uint32_t>(-1);
        for (auto m : all.members) {
            std::uint32_t ecc = 0;
            for (auto o : all.members) ecc = std::max(ecc, topology.distance(m, o));
            if (ecc < best_ecc) {
                best_ecc = ecc;
                best = m.index;
            }
        }
        all.leader = ShardId{best};
        all.diameter = topology.diameter();
        layers.push_back({{std::move(all)}});
    }
    return ClusterHierarchy(s, std::move(layers));
}

ClusterHierarchy build_hierarchy(const Topology& topology) {
    if (topology.is_line() && topology.kind() != Topology::Kind::uniform) return line_cluster_hierarchy(topology);
    return flat_cluster_hierarchy(topology);
}

std::vector<ShardId> neighborhood(const Topology& topology, ShardId center, std::uint32_t radius) {
    std::vector<ShardId> out;
    for (std::uint32_t i = 0; i < topology.shards(); ++i) {
        if (topology.distance(center, ShardId{i}) <= radius) out.push_back(ShardId{i});
    }
    return out;
}

ClusterRef home_cluster(ShardId home, std::span<const ShardId> destinations, const ClusterHierarchy& hierarchy,
                        const Topology& topology) {
    std::uint32_t x = 0;
    for (auto d : destinations) x = std::max(x, topology.distance(home, d));
    const auto ball = neighborhood(topology, home, x);
    for (std::uint32_t l = 0; l < hierarchy.layers(); ++l) {
        for (std::uint32_t j = 0; j < hierarchy.sublayers(l); ++j) {
            const auto& c = hierarchy.cluster_of(home, l, j);
            if (!c.leader) continue;
            if (std::all_of(ball.begin(), ball.end(), [&](ShardId s) { return c.contains(s); })) return c.ref;
        }
    }
    throw std::logic_error("no leader cluster contains the neighborhood of " + home.name());
}

std::optional<std::uint32_t> leader_radius(const Cluster& cluster, const Topology& topology) {
    if (!cluster.leader) return std::nullopt;
    if (cluster.members.size() == topology.shards()) return topology.diameter();
    std::uint32_t q = 0;
    while (true) {
        const auto ball = neighborhood(topology, *cluster.leader, q + 1);
        if (!std::all_of(ball.begin(), ball.end(), [&](ShardId s) { return cluster.contains(s); })) return q;
        ++q;
    }
}

}  // namespace shard_sched

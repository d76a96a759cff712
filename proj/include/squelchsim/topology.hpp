#pragma once

#include "squelchsim/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

namespace squelchsim {

inline constexpr double kDefaultLatencyMs = 20.0;

struct Edge {
    NodeId u;  // u < v
    NodeId v;
    double latency_ms;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    PeerId peer;
    double latency_ms;
};

/// Undirected peer graph with per-edge latency and a validator/tracker split.
///
/// Immutable once built; all invariants (no self-loops, no duplicate edges,
/// positive latencies, endpoints in range) are checked by the constructor.
class TopologyGraph {
public:
    TopologyGraph() = default;
    TopologyGraph(std::size_t node_count, std::vector<Edge> edges, const std::set<NodeId>& validators);

    std::size_t node_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    // Sorted by (u, v).
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    // Sorted by peer id.
    const std::vector<Neighbor>& neighbors(NodeId n) const { return adjacency_.at(n); }
    std::size_t degree(NodeId n) const { return adjacency_.at(n).size(); }

    bool is_validator(NodeId n) const { return is_validator_.at(n); }
    std::vector<NodeId> validators() const;
    std::vector<NodeId> trackers() const;

    std::optional<double> latency(NodeId a, NodeId b) const;
    bool has_edge(NodeId a, NodeId b) const { return latency(a, b).has_value(); }

    bool connected() const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<bool> is_validator_;
};

struct LoadOptions {
    double default_latency_ms = kDefaultLatencyMs;
    // When set, ids in [0, node_count) are nodes even if they appear in no edge.
    std::optional<std::size_t> node_count;
};

// Format: one edge per line, "u v [latency_ms]"; blank lines and '#' comments skipped.
TopologyGraph load_topology(std::string_view edge_list_text, const std::set<NodeId>& validator_ids,
                            const LoadOptions& options = {});

struct GeneratorParams {
    std::size_t node_count = 15;
    double target_avg_degree = 6.0;
    double validator_fraction = 0.33;
    double latency_low_ms = 5.0;
    double latency_high_ms = 50.0;
    std::uint64_t seed = 0;
};

TopologyGraph generate_topology(const GeneratorParams& params);

struct GraphStats {
    std::int64_t diameter = 0;
    std::int64_t radius = 0;
    double avg_distance = 0.0;
    double median_distance = 0.0;
    double avg_degree = 0.0;
    std::int64_t max_degree = 0;
    bool connected = false;
    std::int64_t giant_component_size = 0;

    friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

GraphStats graph_stats(const TopologyGraph& g);

nlohmann::json to_json(const GraphStats& s);
std::string to_edge_list(const TopologyGraph& g);

}  // namespace squelchsim

#include "squelchsim/topology.hpp"

#include "squelchsim/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

namespace squelchsim {

TopologyGraph::TopologyGraph(std::size_t node_count, std::vector<Edge> edges, const std::set<NodeId>& validators)
    : edges_(std::move(edges)), adjacency_(node_count), is_validator_(node_count, false) {
    for (auto& e : edges_) {
        if (e.u == e.v) throw ParameterError("self-loop on node " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
        if (e.v >= node_count) throw UnknownNodeError("edge endpoint " + std::to_string(e.v) + " out of range");
        if (!(e.latency_ms > 0.0) || !std::isfinite(e.latency_ms)) {
            throw ParameterError("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) + " has non-positive latency");
        }
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
            throw ParameterError("duplicate edge " + std::to_string(edges_[i].u) + "-" + std::to_string(edges_[i].v));
        }
    }
    for (const auto& e : edges_) {
        adjacency_[e.u].push_back({e.v, e.latency_ms});
        adjacency_[e.v].push_back({e.u, e.latency_ms});
    }
    for (auto& adj : adjacency_) {
        std::sort(adj.begin(), adj.end(), [](const Neighbor& a, const Neighbor& b) { return a.peer < b.peer; });
    }
    for (NodeId v : validators) {
        if (v >= node_count) throw UnknownNodeError("validator " + std::to_string(v) + " is not a node");
        is_validator_[v] = true;
    }
}

std::vector<NodeId> TopologyGraph::validators() const {
    std::vector<NodeId> out;
    for (NodeId n = 0; n < is_validator_.size(); ++n) {
        if (is_validator_[n]) out.push_back(n);
    }
    return out;
}

std::vector<NodeId> TopologyGraph::trackers() const {
    std::vector<NodeId> out;
    for (NodeId n = 0; n < is_validator_.size(); ++n) {
        if (!is_validator_[n]) out.push_back(n);
    }
    return out;
}

std::optional<double> TopologyGraph::latency(NodeId a, NodeId b) const {
    if (a >= adjacency_.size()) return std::nullopt;
    const auto& adj = adjacency_[a];
    auto it = std::lower_bound(adj.begin(), adj.end(), b, [](const Neighbor& n, NodeId id) { return n.peer < id; });
    if (it == adj.end() || it->peer != b) return std::nullopt;
    return it->latency_ms;
}

namespace {

// Component label per node, labels assigned in order of smallest member id.
std::vector<std::size_t> component_labels(const TopologyGraph& g, std::size_t& count) {
    const std::size_t n = g.node_count();
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> label(n, unset);
    count = 0;
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < n; ++s) {
        if (label[s] != unset) continue;
        label[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (const auto& nb : g.neighbors(u)) {
                if (label[nb.peer] == unset) {
                    label[nb.peer] = count;
                    stack.push_back(nb.peer);
                }
            }
        }
        ++count;
    }
    return label;
}

}  // namespace

bool TopologyGraph::connected() const {
    if (node_count() == 0) return false;
    std::size_t count = 0;
    component_labels(*this, count);
    return count == 1;
}

TopologyGraph load_topology(std::string_view text, const std::set<NodeId>& validator_ids, const LoadOptions& options) {
    std::vector<Edge> edges;
    std::set<std::pair<NodeId, NodeId>> seen;
    std::set<NodeId> mentioned;
    std::size_t line_no = 0;
    std::size_t max_id_plus_one = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream in(line);
        std::vector<std::string> fields;
        for (std::string tok; in >> tok;) fields.push_back(tok);
        if (fields.empty()) continue;
        if (fields.size() < 2 || fields.size() > 3) {
            throw ParseError(line_no, "expected \"u v [latency_ms]\"");
        }

        auto parse_id = [&](const std::string& s) {
            std::uint64_t v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size() || v > std::numeric_limits<NodeId>::max() - 1) {
                throw ParseError(line_no, "bad node id '" + s + "'");
            }
            return static_cast<NodeId>(v);
        };
        NodeId u = parse_id(fields[0]);
        NodeId v = parse_id(fields[1]);
        double lat = options.default_latency_ms;
        if (fields.size() == 3) {
            const auto& s = fields[2];
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), lat);
            if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(line_no, "bad latency '" + s + "'");
            if (!(lat > 0.0) || !std::isfinite(lat)) throw ParseError(line_no, "latency must be positive");
        }
        if (u == v) throw ParseError(line_no, "self-loop on node " + std::to_string(u));
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) {
            throw ParseError(line_no, "duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
        }
        mentioned.insert(u);
        mentioned.insert(v);
        max_id_plus_one = std::max<std::size_t>(max_id_plus_one, std::size_t{v} + 1);
        edges.push_back({u, v, lat});
    }

    std::size_t node_count = max_id_plus_one;
    if (options.node_count) {
        if (*options.node_count < max_id_plus_one) {
            throw UnknownNodeError("edge list references node " + std::to_string(max_id_plus_one - 1) +
                                   " beyond declared node count " + std::to_string(*options.node_count));
        }
        node_count = *options.node_count;
    }
    for (NodeId v : validator_ids) {
        const bool declared = options.node_count && v < *options.node_count;
        if (!declared && !mentioned.count(v)) {
            throw UnknownNodeError("validator " + std::to_string(v) + " does not appear in the edge list");
        }
    }
    return TopologyGraph(node_count, std::move(edges), validator_ids);
}

TopologyGraph generate_topology(const GeneratorParams& p) {
    const std::size_t n = p.node_count;
    if (n < 2) throw ParameterError("node_count must be at least 2");
    const double nd = static_cast<double>(n);
    if (!(p.target_avg_degree <= nd - 1.0 + 1e-9)) {
        throw ParameterError("target_avg_degree exceeds node_count - 1");
    }
    if (!(p.target_avg_degree >= 2.0 * (nd - 1.0) / nd - 1e-9)) {
        throw ParameterError("target_avg_degree too low for a connected graph on " + std::to_string(n) + " nodes");
    }
    if (!(p.validator_fraction > 0.0 && p.validator_fraction < 1.0)) {
        throw ParameterError("validator_fraction must lie in (0, 1)");
    }
    if (!(p.latency_low_ms > 0.0) || p.latency_high_ms < p.latency_low_ms) {
        throw ParameterError("latency range must satisfy 0 < low <= high");
    }

    Rng rng(hash_combine(p.seed, 0x746f706fULL));
    const std::size_t max_edges = n * (n - 1) / 2;
    const auto target_edges = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(p.target_avg_degree * nd / 2.0)), n - 1, max_edges);

    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<std::size_t> deficit(n, 0);
    auto add = [&](NodeId a, NodeId b) {
        adj[a][b] = adj[b][a] = true;
        pairs.emplace_back(std::min(a, b), std::max(a, b));
        if (deficit[a]) --deficit[a];
        if (deficit[b]) --deficit[b];
    };

    if (target_edges == max_edges) {
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b) add(a, b);
    } else {
        // Stub degrees: every node gets floor or ceil of the mean so the sum is exactly 2M.
        const std::size_t total = 2 * target_edges;
        const std::size_t base = total / n;
        std::vector<NodeId> order(n);
        std::iota(order.begin(), order.end(), NodeId{0});
        rng.shuffle(order);
        for (std::size_t i = 0; i < n; ++i) deficit[order[i]] = base + (i < total - base * n ? 1 : 0);

        std::vector<NodeId> stubs;
        for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), deficit[v], v);
        // Matching passes: collisions (self-loops, repeated pairs) are returned to the pool.
        for (int pass = 0; pass < 8 && stubs.size() >= 2; ++pass) {
            rng.shuffle(stubs);
            std::vector<NodeId> rest;
            for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
                NodeId a = stubs[i], b = stubs[i + 1];
                if (a != b && !adj[a][b]) {
                    add(a, b);
                } else {
                    rest.push_back(a);
                    rest.push_back(b);
                }
            }
            if (stubs.size() % 2) rest.push_back(stubs.back());
            stubs = std::move(rest);
        }

        // Top up to the target edge count, preferring nodes still short of their stub degree.
        while (pairs.size() < target_edges) {
            std::vector<std::pair<NodeId, NodeId>> candidates;
            int best = -1;
            for (NodeId a = 0; a < n; ++a) {
                for (NodeId b = a + 1; b < n; ++b) {
                    if (adj[a][b]) continue;
                    int score = (deficit[a] > 0) + (deficit[b] > 0);
                    if (score > best) {
                        best = score;
                        candidates.clear();
                    }
                    if (score == best) candidates.emplace_back(a, b);
                }
            }
            const auto [a, b] = candidates[rng.below(candidates.size())];
            add(a, b);
        }
    }

    // Bridge components into the one holding node 0.
    for (;;) {
        std::vector<std::size_t> label(n, n);
        std::size_t count = 0;
        for (NodeId s = 0; s < n; ++s) {
            if (label[s] != n) continue;
            std::deque<NodeId> q{s};
            label[s] = count;
            while (!q.empty()) {
                NodeId u = q.front();
                q.pop_front();
                for (NodeId w = 0; w < n; ++w) {
                    if (adj[u][w] && label[w] == n) {
                        label[w] = count;
                        q.push_back(w);
                    }
                }
            }
            ++count;
        }
        if (count == 1) break;
        std::vector<NodeId> in_main, in_other;
        for (NodeId v = 0; v < n; ++v) {
            if (label[v] == 0) in_main.push_back(v);
            if (label[v] == 1) in_other.push_back(v);
        }
        add(in_main[rng.below(in_main.size())], in_other[rng.below(in_other.size())]);
    }

    std::sort(pairs.begin(), pairs.end());
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (auto [a, b] : pairs) edges.push_back({a, b, rng.uniform(p.latency_low_ms, p.latency_high_ms)});

    auto k = static_cast<std::size_t>(std::ceil(p.validator_fraction * nd - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), NodeId{0});
    rng.shuffle(ids);
    std::set<NodeId> validators(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));

    return TopologyGraph(n, std::move(edges), validators);
}

GraphStats graph_stats(const TopologyGraph& g) {
    GraphStats s;
    const std::size_t n = g.node_count();
    if (n == 0) return s;

    s.avg_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
    for (NodeId v = 0; v < n; ++v) s.max_degree = std::max<std::int64_t>(s.max_degree, g.degree(v));

    std::size_t count = 0;
    auto label = component_labels(g, count);
    std::vector<std::size_t> sizes(count, 0);
    for (auto l : label) ++sizes[l];
    const auto giant = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    s.connected = count == 1;
    s.giant_component_size = static_cast<std::int64_t>(sizes[giant]);

    // Histogram of hop distances over unordered pairs in the giant component.
    std::vector<std::uint64_t> hist;
    std::int64_t diameter = 0;
    std::int64_t radius = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int64_t> dist(n);
    std::deque<NodeId> q;
    for (NodeId src = 0; src < n; ++src) {
        if (label[src] != giant) continue;
        std::fill(dist.begin(), dist.end(), -1);
        dist[src] = 0;
        q.assign({src});
        std::int64_t ecc = 0;
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            ecc = std::max(ecc, dist[u]);
            if (u > src) {
                if (hist.size() <= static_cast<std::size_t>(dist[u])) hist.resize(dist[u] + 1, 0);
                ++hist[dist[u]];
            }
            for (const auto& nb : g.neighbors(u)) {
                if (dist[nb.peer] < 0) {
                    dist[nb.peer] = dist[u] + 1;
                    q.push_back(nb.peer);
                }
            }
        }
        diameter = std::max(diameter, ecc);
        radius = std::min(radius, ecc);
    }
    s.diameter = diameter;
    s.radius = radius;

    std::uint64_t pairs = 0, sum = 0;
    for (std::size_t d = 0; d < hist.size(); ++d) {
        pairs += hist[d];
        sum += hist[d] * d;
    }
    if (pairs > 0) {
        s.avg_distance = static_cast<double>(sum) / static_cast<double>(pairs);
        // Median over the sorted pair distances; mean of the two middle ranks when even.
        auto value_at = [&](std::uint64_t rank) {
            std::uint64_t seen = 0;
            for (std::size_t d = 0; d < hist.size(); ++d) {
                seen += hist[d];
                if (rank < seen) return static_cast<double>(d);
            }
            return static_cast<double>(hist.size() - 1);
        };
        s.median_distance = pairs % 2 ? value_at(pairs / 2) : (value_at(pairs / 2 - 1) + value_at(pairs / 2)) / 2.0;
    }
    return s;
}

nlohmann::json to_json(const GraphStats& s) {
    return {
        {"diameter", s.diameter},
        {"radius", s.radius},
        {"avg_distance", s.avg_distance},
        {"median_distance", s.median_distance},
        {"avg_degree", s.avg_degree},
        {"max_degree", s.max_degree},
        {"connected", s.connected},
        {"giant_component_size", s.giant_component_size},
    };
}

std::string to_edge_list(const TopologyGraph& g) {
    std::string out = "# nodes " + std::to_string(g.node_count()) + " edges " + std::to_string(g.edge_count()) + "\n";
    out += "# validators";
    for (NodeId v : g.validators()) out += " " + std::to_string(v);
    out += "\n";
    char buf[64];
    for (const auto& e : g.edges()) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, e.latency_ms);
        out += std::to_string(e.u) + " " + std::to_string(e.v) + " " + std::string(buf, p) + "\n";
    }
    return out;
}

}  // namespace squelchsim

#pragma once

// Randomized and exhaustive checks shared by the property tests and the
// acceptance runner. Each returns a small report instead of asserting, so the
// caller decides how to present it.

#include "oracles.hpp"

#include "squelchsim/engine.hpp"
#include "squelchsim/squelch.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace checks {

using namespace squelchsim;

struct Report {
    bool ok = true;
    std::uint64_t cases = 0;
    std::string detail;  // first failure, or a summary

    void fail(const std::string& what) {
        if (ok) detail = what;
        ok = false;
    }
};

inline std::uint64_t sum_in(const MetricsLog& log, NodeId node, MessageKind kind) {
    std::uint64_t s = 0;
    for (std::size_t sec = 0; sec < log.bucket_count(); ++sec) s += log.at(node, sec, kind, Direction::In).messages;
    return s;
}

// One transaction flooded from a random node of a random connected graph.
inline Report flood_transmissions(std::uint64_t seeds, std::size_t max_nodes) {
    Report r;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        Rng rng(seed * 7919 + 1);
        const std::size_t n = 2 + rng.below(max_nodes - 1);
        const std::size_t extra = rng.below(n * 3 + 1);
        auto g = oracle::random_connected(n, extra, seed, 0);
        const auto origin = static_cast<NodeId>(rng.below(n));

        ScenarioConfig cfg;
        cfg.relay_policy = RelayPolicy::Flood;
        cfg.duration_ms = 60'000.0;
        cfg.warmup_ms = 0.0;
        cfg.seed = seed;
        cfg.tx_plan.push_back({1'000.0, {origin}, 1, 1.0});
        auto res = simulate(cfg, g);

        const auto expected = 2 * g.edge_count() - (n - 1);
        const auto enumerated = oracle::flood_enumerate(g, origin);
        ++r.cases;
        std::ostringstream where;
        where << "seed " << seed << " (N=" << n << ", E=" << g.edge_count() << ")";
        if (res.transmissions != expected || enumerated.transmissions != expected) {
            r.fail(where.str() + ": engine " + std::to_string(res.transmissions) + ", enumeration " +
                   std::to_string(enumerated.transmissions) + ", formula " + std::to_string(expected));
            continue;
        }
        // Which neighbour delivers first depends on timing, so per-node copy
        // counts are not comparable; reception totals and reach are.
        std::uint64_t received = 0;
        for (NodeId v = 0; v < n; ++v) {
            const auto in = sum_in(res.log, v, MessageKind::Transaction);
            received += in;
            if (v != origin && in == 0) r.fail(where.str() + ": node " + std::to_string(v) + " never received the message");
        }
        if (received != expected) r.fail(where.str() + ": receptions " + std::to_string(received) + " != transmissions");
    }
    if (r.ok) r.detail = std::to_string(r.cases) + " graphs, transmissions == 2|E|-(N-1) == enumerated count";
    return r;
}

// Random 15-50 node scenarios; every message emitted early enough to finish
// must reach every node, under both policies. Squelches keep their default
// durations, so none expires within a run.
inline Report delivery_completeness(std::uint64_t scenarios, std::uint64_t seed_base = 0) {
    Report r;
    constexpr double kDuration = 20'000.0;
    constexpr double kSettle = 5'000.0;  // messages emitted later may legitimately still be in flight
    std::uint64_t messages_checked = 0;
    for (std::uint64_t i = 0; i < scenarios; ++i) {
        const auto seed = seed_base + i;
        Rng rng(seed * 104729 + 3);
        GeneratorParams gp;
        gp.node_count = 15 + rng.below(36);
        const double max_deg = std::min<double>(12.0, static_cast<double>(gp.node_count - 1));
        gp.target_avg_degree = rng.uniform(2.5, max_deg);
        gp.validator_fraction = rng.uniform(0.15, 0.4);
        gp.latency_low_ms = rng.uniform(1.0, 10.0);
        gp.latency_high_ms = gp.latency_low_ms + rng.uniform(0.0, 60.0);
        gp.seed = seed;
        auto g = generate_topology(gp);

        ScenarioConfig cfg;
        cfg.duration_ms = kDuration;
        cfg.warmup_ms = 0.0;
        cfg.seed = seed;
        cfg.ledger_round_ms = rng.uniform(250.0, 1500.0);
        cfg.proposals_per_round = static_cast<std::uint32_t>(1 + rng.below(3));
        cfg.protocol.count_threshold = static_cast<std::uint32_t>(1 + rng.below(10));
        cfg.protocol.max_selected = static_cast<std::uint32_t>(1 + rng.below(4));
        const auto trackers = g.trackers();
        if (!trackers.empty()) {
            cfg.tx_plan.push_back({rng.uniform(0.0, 8'000.0), {trackers[rng.below(trackers.size())]},
                                   50 + rng.below(150), rng.uniform(20.0, 100.0)});
        }

        for (auto policy : {RelayPolicy::Flood, RelayPolicy::Squelch}) {
            cfg.relay_policy = policy;
            auto res = simulate(cfg, g);
            ++r.cases;
            for (const auto& m : res.messages) {
                if (m.emitted_at > kDuration - kSettle) continue;
                ++messages_checked;
                if (m.nodes_reached != g.node_count()) {
                    r.fail("scenario seed " + std::to_string(seed) + " (" + to_string(policy) + "): " +
                           to_string(m.kind) + " from node " + std::to_string(m.origin) + " reached " +
                           std::to_string(m.nodes_reached) + "/" + std::to_string(g.node_count()) + " nodes");
                    break;
                }
            }
        }
    }
    if (r.ok) {
        r.detail = std::to_string(r.cases) + " runs, " + std::to_string(messages_checked) +
                   " messages each reached every node";
    }
    return r;
}

// Walks every arrival order in which each of k peers delivers `threshold`
// copies. Orders that lead to the same slot state share their continuation,
// so the walk is over states; every order is still covered.
struct EnumerationReport {
    Report report;
    std::uint64_t states = 0;
    std::uint64_t orders = 0;  // number of distinct arrival sequences covered
};

inline EnumerationReport enumerate_arrivals(std::uint32_t k, std::uint32_t threshold, std::uint32_t max_selected) {
    EnumerationReport out;
    ProtocolConfig cfg;
    cfg.count_threshold = threshold;
    cfg.max_selected = max_selected;
    std::set<PeerId> peers;
    for (PeerId p = 1; p <= k; ++p) peers.insert(p);

    struct Node {
        Slot slot;
        std::vector<std::uint32_t> remaining;
        std::vector<std::uint32_t> squelch_sent;  // per peer
    };
    auto key_of = [](const Node& n) {
        std::ostringstream os;
        for (auto v : n.remaining) os << v << ',';
        os << '|';
        for (auto [p, c] : n.slot.per_peer_count) os << p << ':' << c << ',';
        os << '|';
        for (auto p : n.slot.selected) os << p << ',';
        os << '|';
        for (auto [p, t] : n.slot.squelched) os << p << ',';
        os << '|' << static_cast<int>(n.slot.state) << '|';
        for (auto v : n.squelch_sent) os << v << ',';
        return os.str();
    };

    // Number of sequences = multinomial(k*threshold; threshold, ..., threshold).
    long double orders = 1;
    for (std::uint32_t i = 1; i <= k * threshold; ++i) orders *= i;
    for (std::uint32_t p = 0; p < k; ++p)
        for (std::uint32_t i = 1; i <= threshold; ++i) orders /= i;
    out.orders = static_cast<std::uint64_t>(orders + 0.5L);

    std::set<std::string> seen;
    std::vector<Node> stack;
    stack.push_back({Slot(0, 42, peers), std::vector<std::uint32_t>(k, threshold), std::vector<std::uint32_t>(k, 0)});
    auto& rep = out.report;
    const auto tag = "k=" + std::to_string(k) + " t=" + std::to_string(threshold) + " m=" + std::to_string(max_selected);
    while (!stack.empty() && rep.ok) {
        Node n = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(key_of(n)).second) continue;
        ++out.states;

        for (auto p : n.slot.selected) {
            if (n.slot.squelched.count(p)) rep.fail(tag + ": a peer is both selected and squelched");
        }
        if (n.slot.selected.size() > max_selected) rep.fail(tag + ": too many selected peers");

        bool terminal = true;
        for (std::uint32_t i = 0; i < k; ++i) {
            if (n.remaining[i] == 0) continue;
            terminal = false;
            Node next = n;
            --next.remaining[i];
            for (const auto& a : on_validator_message(next.slot, i + 1, 0.0, cfg)) {
                if (a.message.kind() != ControlKind::Squelch) rep.fail(tag + ": unexpected unsquelch");
                ++next.squelch_sent[a.to - 1];
            }
            stack.push_back(std::move(next));
        }
        if (!terminal) continue;

        ++rep.cases;
        const auto expect_selected = std::min(k, max_selected);
        if (n.slot.selected.size() != expect_selected) {
            rep.fail(tag + ": " + std::to_string(n.slot.selected.size()) + " selected at the end");
        }
        if (n.slot.squelched.size() != k - expect_selected) {
            rep.fail(tag + ": " + std::to_string(n.slot.squelched.size()) + " squelched at the end");
        }
        for (PeerId p = 1; p <= k; ++p) {
            const bool sel = n.slot.selected.count(p) > 0;
            if (n.squelch_sent[p - 1] != (sel ? 0u : 1u)) {
                rep.fail(tag + ": peer " + std::to_string(p) + " received " + std::to_string(n.squelch_sent[p - 1]) +
                         " squelch messages");
            }
        }
    }
    if (rep.ok) rep.detail = tag + ": " + std::to_string(out.states) + " states, " + std::to_string(rep.cases) + " end states";
    return out;
}

// Full sweep k <= 5, threshold <= 3, max_selected <= k.
inline Report enumerate_all_arrivals() {
    Report total;
    std::uint64_t orders = 0, states = 0;
    for (std::uint32_t k = 1; k <= 5; ++k)
        for (std::uint32_t t = 1; t <= 3; ++t)
            for (std::uint32_t m = 1; m <= k; ++m) {
                auto e = enumerate_arrivals(k, t, m);
                ++total.cases;
                orders += e.orders;
                states += e.states;
                if (!e.report.ok) total.fail(e.report.detail);
            }
    if (total.ok) {
        total.detail = std::to_string(total.cases) + " configurations, " + std::to_string(orders) +
                       " arrival orders via " + std::to_string(states) + " distinct states";
    }
    return total;
}

// A squelched peer that becomes the fastest after expiry gets selected.
inline Report reselection_after_expiry() {
    Report r;
    ProtocolConfig cfg;
    cfg.count_threshold = 3;
    cfg.max_selected = 3;
    Slot slot(0, 9, {1, 2, 3, 4, 5});
    SimTime now = 0.0;
    for (int i = 0; i < 3; ++i)
        for (PeerId p : {2u, 3u, 4u, 1u, 5u}) on_validator_message(slot, p, now, cfg);
    ++r.cases;
    if (slot.selected != std::set<PeerId>{2, 3, 4} || slot.squelched.size() != 2) {
        r.fail("first round did not keep {2,3,4}");
        return r;
    }
    // Both squelches run out; the earlier one restarts counting.
    now = std::max(slot.squelched.at(1), slot.squelched.at(5));
    on_squelch_expired(slot, 1, now);
    on_squelch_expired(slot, 5, now);
    if (slot.state != SlotState::Counting) r.fail("expiry did not restore Counting");
    for (int i = 0; i < 3; ++i)
        for (PeerId p : {1u, 2u, 5u, 3u, 4u}) on_validator_message(slot, p, now + 1.0, cfg);
    ++r.cases;
    if (slot.selected != std::set<PeerId>{1, 2, 5}) r.fail("previously squelched peers were not re-selected");
    if (slot.squelched.size() != 2 || !slot.squelched.count(3) || !slot.squelched.count(4)) {
        r.fail("second round did not squelch {3,4}");
    }
    if (r.ok) r.detail = "peers 1 and 5 squelched in round 1, selected in round 2";
    return r;
}

// Losing a selected uplink unsquelches every squelched peer of every affected slot.
inline Report uplink_loss_unsquelches() {
    Report r;
    ProtocolConfig cfg;
    cfg.count_threshold = 2;
    cfg.max_selected = 2;
    std::map<ValidatorId, Slot> slots;
    for (ValidatorId v : {10u, 20u, 30u}) {
        slots[v] = Slot(0, v, {1, 2, 3, 4});
        // Validator 30 selects {3,4}; the others select {1,2}.
        const std::vector<PeerId> order = v == 30 ? std::vector<PeerId>{3, 4, 3, 4, 1, 2}
                                                  : std::vector<PeerId>{1, 2, 1, 2, 3, 4};
        for (auto p : order) on_validator_message(slots[v], p, 0.0, cfg);
    }
    auto actions = on_uplink_lost(slots, 1, 5.0);
    std::map<ValidatorId, std::set<PeerId>> got;
    for (const auto& a : actions) {
        if (a.message.kind() != ControlKind::Unsquelch) r.fail("non-unsquelch action on uplink loss");
        got[a.message.origin_validator()].insert(a.to);
    }
    ++r.cases;
    const std::map<ValidatorId, std::set<PeerId>> want{{10, {3, 4}}, {20, {3, 4}}};
    if (got != want || actions.size() != 4) r.fail("unsquelch targets differ from the squelched peers of slots 10 and 20");
    for (ValidatorId v : {10u, 20u}) {
        if (slots[v].state != SlotState::Counting || !slots[v].squelched.empty()) {
            r.fail("slot " + std::to_string(v) + " was not reset");
        }
    }
    if (slots[30].state != SlotState::Selected || slots[30].squelched.count(1) != 0 || slots[30].peers.count(1)) {
        r.fail("slot 30 should only drop the lost peer");
    }
    if (r.ok) r.detail = "4 unsquelches to {3,4} for validators 10 and 20, validator 30 untouched";
    return r;
}

}  // namespace checks

#include "squelchsim/engine.hpp"

#include "squelchsim/config.hpp"
#include "squelchsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <variant>

namespace squelchsim {

const char* to_string(RelayPolicy p) noexcept { return p == RelayPolicy::Flood ? "flood" : "squelch"; }

RelayPolicy relay_policy_from_string(const std::string& s) {
    if (s == "flood") return RelayPolicy::Flood;
    if (s == "squelch") return RelayPolicy::Squelch;
    throw ParameterError("unknown relay policy '" + s + "' (expected flood or squelch)");
}

std::uint64_t MessageSizes::of(MessageKind k) const noexcept {
    switch (k) {
        case MessageKind::Transaction: return transaction;
        case MessageKind::Proposal: return proposal;
        case MessageKind::Validation: return validation;
        default: return control;
    }
}

std::uint64_t SimMessage::dedup_key() const noexcept {
    return (static_cast<std::uint64_t>(kind) << 61) | (static_cast<std::uint64_t>(origin) << 40) |
           (sequence & ((std::uint64_t{1} << 40) - 1));
}

void validate(const ScenarioConfig& cfg) {
    if (!(cfg.duration_ms > 0.0)) throw ParameterError("duration_ms must be positive");
    if (!(cfg.warmup_ms >= 0.0)) throw ParameterError("warmup_ms must be non-negative");
    if (!(cfg.duration_ms > cfg.warmup_ms)) throw ParameterError("duration_ms must exceed warmup_ms");
    if (!(cfg.ledger_round_ms > 0.0)) throw ParameterError("ledger_round_ms must be positive");
    if (cfg.protocol.count_threshold == 0) throw ParameterError("count_threshold must be at least 1");
    if (cfg.protocol.max_selected == 0) throw ParameterError("max_selected must be at least 1");
    if (cfg.protocol.squelch_base_ms <= 0) throw ParameterError("squelch_base_ms must be positive");
    if (cfg.protocol.squelch_jitter_ms < 0) throw ParameterError("squelch_jitter_ms must be non-negative");
    if (cfg.protocol.squelch_kinds.contains(MessageKind::Squelch) ||
        cfg.protocol.squelch_kinds.contains(MessageKind::Unsquelch)) {
        throw ParameterError("squelch_kinds may only name application kinds");
    }
    for (auto size : {cfg.sizes.transaction, cfg.sizes.proposal, cfg.sizes.validation, cfg.sizes.control}) {
        if (size == 0) throw ParameterError("message sizes must be positive");
    }
    for (const auto& b : cfg.tx_plan) {
        if (!(b.start_ms >= 0.0)) throw ParameterError("tx burst start_ms must be non-negative");
        if (!(b.rate_per_s > 0.0)) throw ParameterError("tx burst rate_per_s must be positive");
        if (b.count > 0 && b.nodes.empty()) throw ParameterError("tx burst with transactions but no nodes");
    }
    for (const auto& d : cfg.disconnects) {
        if (!(d.at_ms >= 0.0)) throw ParameterError("disconnect at_ms must be non-negative");
        if (d.a == d.b) throw ParameterError("disconnect endpoints must differ");
    }
}

TopologyGraph build_topology(const ScenarioConfig& cfg) {
    const auto& src = cfg.topology;
    if (!src.edge_list_path.empty()) {
        std::ifstream in(src.edge_list_path);
        if (!in) throw SetupError("cannot read edge list '" + src.edge_list_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        LoadOptions opts;
        opts.default_latency_ms = src.default_latency_ms;
        return load_topology(ss.str(), src.validators, opts);
    }
    GeneratorParams params = src.generator;
    params.seed = src.seed.value_or(cfg.seed);
    return generate_topology(params);
}

std::vector<PeerId> relay_decision_flood(std::span<const PeerId> peers, std::optional<PeerId> arrived_from) {
    std::vector<PeerId> out;
    out.reserve(peers.size());
    for (PeerId p : peers) {
        if (!arrived_from || p != *arrived_from) out.push_back(p);
    }
    return out;
}

std::vector<PeerId> relay_decision_squelch(std::span<const PeerId> peers, const std::map<PeerId, PeerLinkState>& links,
                                           MessageKind kind, NodeId origin, std::optional<PeerId> arrived_from,
                                           SimTime now, const ProtocolConfig& protocol) {
    auto out = relay_decision_flood(peers, arrived_from);
    if (!protocol.squelch_kinds.contains(kind)) return out;
    std::erase_if(out, [&](PeerId p) {
        auto it = links.find(p);
        return it != links.end() && !should_relay(it->second, origin, now);
    });
    return out;
}

namespace {

struct Deliver {
    SimMessage msg;
    NodeId from;
    NodeId to;
    std::optional<ControlMessage> control;
};
struct EmitRound {
    ValidatorId validator;
};
struct Emit {
    NodeId origin;
    MessageKind kind;
};
struct SquelchExpiry {
    NodeId node;
    ValidatorId validator;
    PeerId peer;
    SimTime expiry;
};
struct PeerDisconnect {
    NodeId a;
    NodeId b;
};

using Payload = std::variant<Deliver, EmitRound, Emit, SquelchExpiry, PeerDisconnect>;

struct Event {
    SimTime at;
    std::uint64_t seq;
    Payload payload;
};

struct LaterFirst {
    bool operator()(const Event& a, const Event& b) const { return std::tie(a.at, a.seq) > std::tie(b.at, b.seq); }
};

struct NodeState {
    std::vector<PeerId> peers;  // sorted, live links only
    std::unordered_set<std::uint64_t> seen;
    std::map<ValidatorId, Slot> slots;
    std::map<PeerId, PeerLinkState> links;
    std::array<std::uint64_t, 3> next_sequence{};

    bool linked_to(PeerId p) const { return std::binary_search(peers.begin(), peers.end(), p); }
};

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, const TopologyGraph& graph, std::string hash)
        : cfg_(cfg), graph_(graph), nodes_(graph.node_count()) {
        RunMetadata meta;
        meta.policy = to_string(cfg.relay_policy);
        meta.seed = cfg.seed;
        meta.config_hash = hash.empty() ? config_hash(cfg) : std::move(hash);
        meta.warmup_ms = static_cast<std::int64_t>(std::llround(cfg.warmup_ms));
        const auto buckets = static_cast<std::size_t>(std::ceil(cfg.duration_ms / 1000.0));
        result_.log = MetricsLog(graph.node_count(), buckets, std::move(meta));
        for (NodeId n = 0; n < graph.node_count(); ++n) {
            for (const auto& nb : graph.neighbors(n)) nodes_[n].peers.push_back(nb.peer);
        }
    }

    SimulationResult run() {
        schedule_initial();
        while (!queue_.empty() && queue_.top().at < cfg_.duration_ms) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            ++result_.events_processed;
            std::visit([this](auto& p) { handle(p); }, ev.payload);
        }
        while (!queue_.empty()) {
            if (const auto* d = std::get_if<Deliver>(&queue_.top().payload)) result_.log.record_undelivered(d->msg.kind);
            queue_.pop();
        }
        for (const auto& node : nodes_) {
            for (const auto& [v, slot] : node.slots) {
                result_.ignored_unknown_peer += slot.ignored_messages;
                result_.late_squelched += slot.late_messages;
            }
        }
        return std::move(result_);
    }

private:
    void schedule(SimTime at, Payload p) { queue_.push(Event{at, next_seq_++, std::move(p)}); }

    void schedule_initial() {
        Rng rng(hash_combine(cfg_.seed, 0x656d6974ULL));
        const bool consensus = cfg_.proposals_per_round + cfg_.validations_per_round > 0;
        bool any_emitter = false;
        if (consensus) {
            for (ValidatorId v : graph_.validators()) {
                schedule(rng.uniform(0.0, cfg_.ledger_round_ms), EmitRound{v});
                any_emitter = true;
            }
        }
        for (const auto& burst : cfg_.tx_plan) {
            for (std::uint64_t i = 0; i < burst.count; ++i) {
                const NodeId node = burst.nodes[i % burst.nodes.size()];
                if (node >= graph_.node_count()) {
                    throw SetupError("tx_plan names node " + std::to_string(node) + " outside the topology");
                }
                schedule(burst.start_ms + static_cast<double>(i) * 1000.0 / burst.rate_per_s,
                         Emit{node, MessageKind::Transaction});
                any_emitter = true;
            }
        }
        for (const auto& d : cfg_.disconnects) schedule(d.at_ms, PeerDisconnect{d.a, d.b});
        if (!any_emitter) result_.warnings.emplace_back("scenario has no message emitters; the log will be empty");
    }

    void send(NodeId from, NodeId to, const SimMessage& msg, std::optional<ControlMessage> control = std::nullopt) {
        const auto latency = graph_.latency(from, to);
        if (!latency) throw ContractViolation("send over a non-existent link");
        result_.log.record(from, now_, msg.kind, Direction::Out, msg.size_bytes);
        if (is_application(msg.kind)) ++result_.transmissions;
        else ++result_.control_transmissions;
        schedule(now_ + *latency, Deliver{msg, from, to, control});
    }

    void relay(NodeId node, const SimMessage& msg, std::optional<PeerId> arrived_from) {
        const auto& st = nodes_[node];
        const auto targets = cfg_.relay_policy == RelayPolicy::Flood
                                 ? relay_decision_flood(st.peers, arrived_from)
                                 : relay_decision_squelch(st.peers, st.links, msg.kind, msg.origin, arrived_from, now_,
                                                          cfg_.protocol);
        for (PeerId p : targets) send(node, p, msg);
    }

    void send_actions(NodeId node, const std::vector<ControlAction>& actions) {
        for (const auto& a : actions) {
            const bool squelch = a.message.kind() == ControlKind::Squelch;
            SimMessage m{squelch ? MessageKind::Squelch : MessageKind::Unsquelch, a.message.origin_validator(), 0,
                         cfg_.sizes.control};
            send(node, a.to, m, a.message);
            if (squelch) {
                const SimTime expiry = now_ + static_cast<SimTime>(a.message.duration_ms());
                schedule(expiry, SquelchExpiry{node, a.message.origin_validator(), a.to, expiry});
            }
        }
    }

    Slot& slot_for(NodeId node, ValidatorId v) {
        auto& st = nodes_[node];
        auto it = st.slots.find(v);
        if (it == st.slots.end()) {
            it = st.slots.emplace(v, Slot(node, v, std::set<PeerId>(st.peers.begin(), st.peers.end()))).first;
        }
        return it->second;
    }

    void handle(const EmitRound& e) {
        const double half = cfg_.ledger_round_ms / 2.0;
        for (std::uint32_t i = 0; i < cfg_.proposals_per_round; ++i) {
            schedule(now_ + half * i / cfg_.proposals_per_round, Emit{e.validator, MessageKind::Proposal});
        }
        for (std::uint32_t i = 0; i < cfg_.validations_per_round; ++i) {
            schedule(now_ + half + half * i / cfg_.validations_per_round, Emit{e.validator, MessageKind::Validation});
        }
        schedule(now_ + cfg_.ledger_round_ms, e);
    }

    void handle(const Emit& e) {
        auto& st = nodes_[e.origin];
        SimMessage msg{e.kind, e.origin, st.next_sequence[static_cast<int>(e.kind)]++, cfg_.sizes.of(e.kind)};
        const auto key = msg.dedup_key();
        st.seen.insert(key);
        record_index_[key] = result_.messages.size();
        result_.messages.push_back({key, e.kind, e.origin, now_, 1});
        relay(e.origin, msg, std::nullopt);
    }

    void handle(const Deliver& d) {
        auto& log = result_.log;
        log.record(d.to, now_, d.msg.kind, Direction::In, d.msg.size_bytes);
        auto& st = nodes_[d.to];

        if (d.control) {
            if (!st.linked_to(d.from)) return;
            auto& link = st.links[d.from];
            link.peer = d.from;
            if (d.control->kind() == ControlKind::Squelch) on_squelch_received(link, *d.control, now_);
            else on_unsquelch_received(link, *d.control);
            return;
        }

        const auto key = d.msg.dedup_key();
        const bool first = st.seen.insert(key).second;
        if (first) ++result_.messages[record_index_.at(key)].nodes_reached;
        else log.record_duplicate(d.to, d.msg.kind);

        if (cfg_.relay_policy == RelayPolicy::Squelch && cfg_.protocol.squelch_kinds.contains(d.msg.kind) &&
            d.to != d.msg.origin) {
            auto actions = on_validator_message(slot_for(d.to, d.msg.origin), d.from, now_, cfg_.protocol);
            send_actions(d.to, actions);
        }
        if (first) relay(d.to, d.msg, d.from);
    }

    void handle(const SquelchExpiry& e) {
        auto& slots = nodes_[e.node].slots;
        auto it = slots.find(e.validator);
        if (it == slots.end()) return;
        auto sq = it->second.squelched.find(e.peer);
        // Stale timers: the squelch was cleared, replaced, or already expired lazily.
        if (sq == it->second.squelched.end() || sq->second != e.expiry) return;
        on_squelch_expired(it->second, e.peer, now_);
    }

    void handle(const PeerDisconnect& e) {
        if (e.a >= nodes_.size() || e.b >= nodes_.size() || !nodes_[e.a].linked_to(e.b)) {
            result_.warnings.push_back("disconnect of " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                                       " ignored: no live link");
            return;
        }
        for (auto [self, lost] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
            auto& st = nodes_[self];
            st.peers.erase(std::find(st.peers.begin(), st.peers.end(), lost));
            st.links.erase(lost);
            send_actions(self, on_uplink_lost(st.slots, lost, now_));
        }
    }

    const ScenarioConfig& cfg_;
    const TopologyGraph& graph_;
    std::vector<NodeState> nodes_;
    std::priority_queue<Event, std::vector<Event>, LaterFirst> queue_;
    std::uint64_t next_seq_ = 0;
    SimTime now_ = 0.0;
    std::unordered_map<std::uint64_t, std::size_t> record_index_;
    SimulationResult result_;
};

}  // namespace

SimulationResult simulate(const ScenarioConfig& cfg, const TopologyGraph& graph, std::string hash) {
    validate(cfg);
    if (!graph.connected()) throw SetupError("topology is not connected");
    if (graph.node_count() >= (std::size_t{1} << 21)) throw SetupError("topology too large for message keys");
    return Simulation(cfg, graph, std::move(hash)).run();
}

MetricsLog run_scenario(const ScenarioConfig& cfg) { return simulate(cfg, build_topology(cfg)).log; }

}  // namespace squelchsim

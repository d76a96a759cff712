#pragma once

#include "squelchsim/metrics.hpp"
#include "squelchsim/squelch.hpp"
#include "squelchsim/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace squelchsim {

enum class RelayPolicy : std::uint8_t { Flood, Squelch };

const char* to_string(RelayPolicy p) noexcept;
RelayPolicy relay_policy_from_string(const std::string& s);

struct TxBurst {
    double start_ms = 0.0;
    std::vector<NodeId> nodes;  // submitters, used round-robin
    std::uint64_t count = 0;
    double rate_per_s = 100.0;
};

struct Disconnect {
    double at_ms = 0.0;
    NodeId a = 0;
    NodeId b = 0;
};

struct MessageSizes {
    std::uint64_t transaction = 600;
    std::uint64_t proposal = 200;
    std::uint64_t validation = 150;
    std::uint64_t control = 30;

    std::uint64_t of(MessageKind k) const noexcept;
};

struct TopologySource {
    // Empty path means "generate".
    std::string edge_list_path;
    std::set<NodeId> validators;
    double default_latency_ms = kDefaultLatencyMs;
    GeneratorParams generator;
    // When unset the generator uses the scenario seed.
    std::optional<std::uint64_t> seed;
};

struct ScenarioConfig {
    TopologySource topology;
    double duration_ms = 120'000.0;
    RelayPolicy relay_policy = RelayPolicy::Flood;
    double ledger_round_ms = 1'000.0;
    std::uint32_t proposals_per_round = 1;
    std::uint32_t validations_per_round = 1;
    std::vector<TxBurst> tx_plan;
    ProtocolConfig protocol;
    std::uint64_t seed = 0;
    MessageSizes sizes;
    double warmup_ms = 10'000.0;
    bool include_control_in_total = true;
    std::vector<Disconnect> disconnects;
};

class SetupError : public Error {
public:
    using Error::Error;
};

// Throws ParameterError on the first violated constraint.
void validate(const ScenarioConfig& cfg);

TopologyGraph build_topology(const ScenarioConfig& cfg);

struct SimMessage {
    MessageKind kind = MessageKind::Transaction;
    NodeId origin = 0;
    std::uint64_t sequence = 0;
    std::uint64_t size_bytes = 0;

    // Network-wide identity of an application message.
    std::uint64_t dedup_key() const noexcept;
};

struct MessageRecord {
    std::uint64_t dedup_key = 0;
    MessageKind kind = MessageKind::Transaction;
    NodeId origin = 0;
    SimTime emitted_at = 0.0;
    std::uint32_t nodes_reached = 0;  // origin included
};

struct SimulationResult {
    MetricsLog log;
    std::vector<MessageRecord> messages;  // in emission order
    std::uint64_t events_processed = 0;
    std::uint64_t transmissions = 0;          // application sends
    std::uint64_t control_transmissions = 0;
    std::uint64_t ignored_unknown_peer = 0;
    std::uint64_t late_squelched = 0;
    std::vector<std::string> warnings;
};

// `config_hash` goes into the log metadata; empty means config_hash(cfg).
SimulationResult simulate(const ScenarioConfig& cfg, const TopologyGraph& graph, std::string config_hash = {});

// Builds the topology from the config, then simulates.
MetricsLog run_scenario(const ScenarioConfig& cfg);

// All live peers except the one the message arrived from.
std::vector<PeerId> relay_decision_flood(std::span<const PeerId> peers, std::optional<PeerId> arrived_from);

// Flood set minus peers that squelched `origin` on their link, for squelchable kinds.
std::vector<PeerId> relay_decision_squelch(std::span<const PeerId> peers,
                                           const std::map<PeerId, PeerLinkState>& links, MessageKind kind,
                                           NodeId origin, std::optional<PeerId> arrived_from, SimTime now,
                                           const ProtocolConfig& protocol);

}  // namespace squelchsim

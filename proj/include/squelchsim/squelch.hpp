#pragma once

#include "squelchsim/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace squelchsim {

enum class MessageKind : std::uint8_t { Transaction = 0, Proposal = 1, Validation = 2, Squelch = 3, Unsquelch = 4 };

inline constexpr int kMessageKindCount = 5;

constexpr bool is_application(MessageKind k) noexcept { return static_cast<int>(k) <= 2; }
const char* to_string(MessageKind k) noexcept;
MessageKind message_kind_from_string(const std::string& s);

// Bit set of MessageKind values that the squelch logic applies to.
struct KindSet {
    std::uint8_t bits = 0;

    constexpr KindSet() = default;
    constexpr KindSet(std::initializer_list<MessageKind> kinds) {
        for (auto k : kinds) bits |= static_cast<std::uint8_t>(1u << static_cast<int>(k));
    }
    constexpr bool contains(MessageKind k) const noexcept { return bits & (1u << static_cast<int>(k)); }
    friend bool operator==(KindSet, KindSet) = default;
};

struct ProtocolConfig {
    std::uint32_t count_threshold = 10;
    std::uint32_t max_selected = 3;
    std::int64_t squelch_base_ms = 300'000;
    std::int64_t squelch_jitter_ms = 150'000;
    KindSet squelch_kinds{MessageKind::Proposal, MessageKind::Validation};
};

enum class ControlKind : std::uint8_t { Squelch, Unsquelch };

class ControlMessage {
public:
    // Throws ParameterError for a zero or negative duration.
    static ControlMessage squelch(ValidatorId origin, std::int64_t duration_ms);
    static ControlMessage unsquelch(ValidatorId origin) { return ControlMessage(ControlKind::Unsquelch, origin, 0); }

    ControlKind kind() const noexcept { return kind_; }
    ValidatorId origin_validator() const noexcept { return origin_; }
    std::int64_t duration_ms() const noexcept { return duration_ms_; }

    friend bool operator==(const ControlMessage&, const ControlMessage&) = default;

private:
    ControlMessage(ControlKind k, ValidatorId v, std::int64_t d) : kind_(k), origin_(v), duration_ms_(d) {}

    ControlKind kind_;
    ValidatorId origin_;
    std::int64_t duration_ms_;
};

struct ControlAction {
    PeerId to;
    ControlMessage message;

    friend bool operator==(const ControlAction&, const ControlAction&) = default;
};

enum class SlotState : std::uint8_t { Counting, Selected };

/// Relay state one node keeps for one origin validator.
///
/// While Counting, every copy received from a peer bumps that peer's counter.
/// The first `max_selected` peers to reach `count_threshold` become the
/// selected relayers; at that moment every other peer that has delivered a
/// copy is squelched. Once Selected, any other unsquelched peer that shows
/// up is squelched on its first copy. The expiry of any squelch restarts the
/// round from zero counts.
struct Slot {
    NodeId owner = 0;
    ValidatorId origin_validator = 0;
    std::set<PeerId> peers;  // live neighbours of `owner`
    std::map<PeerId, std::uint32_t> per_peer_count;
    std::set<PeerId> selected;
    std::map<PeerId, SimTime> squelched;  // peer -> expiry
    SlotState state = SlotState::Counting;
    std::uint64_t round = 0;           // selection rounds completed
    std::uint64_t ignored_messages = 0;  // copies from ids not in `peers`
    std::uint64_t late_messages = 0;     // copies from peers under an active squelch

    Slot() = default;
    Slot(NodeId owner_node, ValidatorId origin, std::set<PeerId> live_peers)
        : owner(owner_node), origin_validator(origin), peers(std::move(live_peers)) {}
};

/// What one node knows about one neighbour: the validators that neighbour
/// asked us not to relay to it, with expiry times.
struct PeerLinkState {
    PeerId peer = 0;
    std::map<ValidatorId, SimTime> downlink_squelches;
};

// Deterministic squelch duration: base + hash(owner, peer, round) mod jitter.
std::int64_t squelch_duration_ms(const ProtocolConfig& config, NodeId owner, PeerId peer, std::uint64_t round);

std::vector<ControlAction> on_validator_message(Slot& slot, PeerId from_peer, SimTime now,
                                                const ProtocolConfig& config);

// Throws ContractViolation unless `peer` is squelched with expiry <= now.
void on_squelch_expired(Slot& slot, PeerId peer, SimTime now);

void on_squelch_received(PeerLinkState& link, const ControlMessage& msg, SimTime now);
void on_unsquelch_received(PeerLinkState& link, const ControlMessage& msg);

// `slots` is every slot of one node. Actions are ordered by validator id, then peer id.
std::vector<ControlAction> on_uplink_lost(std::map<ValidatorId, Slot>& slots, PeerId lost_peer, SimTime now);

bool should_relay(const PeerLinkState& link, ValidatorId origin_validator, SimTime now);

}  // namespace squelchsim

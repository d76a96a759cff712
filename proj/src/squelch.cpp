#include "squelchsim/squelch.hpp"

#include "squelchsim/rng.hpp"

namespace squelchsim {

const char* to_string(MessageKind k) noexcept {
    switch (k) {
        case MessageKind::Transaction: return "transaction";
        case MessageKind::Proposal: return "proposal";
        case MessageKind::Validation: return "validation";
        case MessageKind::Squelch: return "squelch";
        case MessageKind::Unsquelch: return "unsquelch";
    }
    return "?";
}

MessageKind message_kind_from_string(const std::string& s) {
    for (int i = 0; i < kMessageKindCount; ++i) {
        auto k = static_cast<MessageKind>(i);
        if (s == to_string(k)) return k;
    }
    throw ParameterError("unknown message kind '" + s + "'");
}

ControlMessage ControlMessage::squelch(ValidatorId origin, std::int64_t duration_ms) {
    if (duration_ms <= 0) throw ParameterError("squelch duration must be positive");
    return ControlMessage(ControlKind::Squelch, origin, duration_ms);
}

std::int64_t squelch_duration_ms(const ProtocolConfig& config, NodeId owner, PeerId peer, std::uint64_t round) {
    std::int64_t jitter = 0;
    if (config.squelch_jitter_ms > 0) {
        const auto h = hash_combine(hash_combine(owner, peer), round);
        jitter = static_cast<std::int64_t>(h % static_cast<std::uint64_t>(config.squelch_jitter_ms));
    }
    return config.squelch_base_ms + jitter;
}

namespace {

ControlAction squelch_peer(Slot& slot, PeerId peer, SimTime now, const ProtocolConfig& config) {
    const auto duration = squelch_duration_ms(config, slot.owner, peer, slot.round);
    slot.squelched[peer] = now + static_cast<SimTime>(duration);
    return {peer, ControlMessage::squelch(slot.origin_validator, duration)};
}

void reset_round(Slot& slot) {
    slot.per_peer_count.clear();
    slot.selected.clear();
    slot.state = SlotState::Counting;
}

}  // namespace

std::vector<ControlAction> on_validator_message(Slot& slot, PeerId from_peer, SimTime now,
                                                const ProtocolConfig& config) {
    std::vector<ControlAction> actions;
    if (!slot.peers.count(from_peer)) {
        ++slot.ignored_messages;
        return actions;
    }
    if (auto it = slot.squelched.find(from_peer); it != slot.squelched.end()) {
        if (it->second > now) {
            ++slot.late_messages;
            return actions;
        }
        // The expiry timer for this peer has not fired yet; apply it now.
        on_squelch_expired(slot, from_peer, now);
    }

    const auto count = ++slot.per_peer_count[from_peer];

    if (slot.state == SlotState::Selected) {
        if (!slot.selected.count(from_peer)) actions.push_back(squelch_peer(slot, from_peer, now, config));
        return actions;
    }

    if (count >= config.count_threshold && slot.selected.size() < config.max_selected) {
        slot.selected.insert(from_peer);
    }
    if (slot.selected.size() >= config.max_selected) {
        slot.state = SlotState::Selected;
        for (const auto& [peer, c] : slot.per_peer_count) {
            if (c > 0 && !slot.selected.count(peer) && !slot.squelched.count(peer)) {
                actions.push_back(squelch_peer(slot, peer, now, config));
            }
        }
        ++slot.round;
    }
    return actions;
}

void on_squelch_expired(Slot& slot, PeerId peer, SimTime now) {
    auto it = slot.squelched.find(peer);
    if (it == slot.squelched.end()) {
        throw ContractViolation("peer " + std::to_string(peer) + " is not squelched for validator " +
                                std::to_string(slot.origin_validator));
    }
    if (it->second > now) {
        throw ContractViolation("squelch of peer " + std::to_string(peer) + " has not expired yet");
    }
    slot.squelched.erase(it);
    reset_round(slot);
}

void on_squelch_received(PeerLinkState& link, const ControlMessage& msg, SimTime now) {
    if (msg.kind() != ControlKind::Squelch) throw ContractViolation("expected a squelch message");
    link.downlink_squelches[msg.origin_validator()] = now + static_cast<SimTime>(msg.duration_ms());
}

void on_unsquelch_received(PeerLinkState& link, const ControlMessage& msg) {
    if (msg.kind() != ControlKind::Unsquelch) throw ContractViolation("expected an unsquelch message");
    link.downlink_squelches.erase(msg.origin_validator());
}

std::vector<ControlAction> on_uplink_lost(std::map<ValidatorId, Slot>& slots, PeerId lost_peer, SimTime) {
    std::vector<ControlAction> actions;
    for (auto& [validator, slot] : slots) {
        slot.peers.erase(lost_peer);
        if (slot.selected.erase(lost_peer)) {
            for (const auto& [peer, expiry] : slot.squelched) {
                if (peer != lost_peer) actions.push_back({peer, ControlMessage::unsquelch(validator)});
            }
            slot.squelched.clear();
            slot.per_peer_count.clear();
            slot.state = SlotState::Counting;
        } else {
            slot.per_peer_count.erase(lost_peer);
            slot.squelched.erase(lost_peer);
        }
    }
    return actions;
}

bool should_relay(const PeerLinkState& link, ValidatorId origin_validator, SimTime now) {
    auto it = link.downlink_squelches.find(origin_validator);
    return it == link.downlink_squelches.end() || it->second <= now;
}

}  // namespace squelchsim

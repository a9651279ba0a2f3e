#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "selfsort/key_value.hpp"

namespace selfsort {

struct AgentId {
    std::uint32_t value = 0;

    friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

/// Sender id used by the environment (trigger impulse) and the sorting list.
inline constexpr AgentId kListEndpoint{0};

enum class Side { Prev, Next };

enum class ProposalKind { Adjacent, AroundPivot };

/// A requested exchange. Adjacent: slots (lo, lo+1). AroundPivot: slots
/// (lo, lo+2) around the pivot at lo+1, which is the proposer and stays put.
/// `expect_lo`/`expect_hi` name the occupants the proposer believes are in
/// the two slots; arbitration denies the proposal when they are not.
struct SwapProposal {
    std::uint64_t id = 0;
    AgentId proposer;
    ProposalKind kind = ProposalKind::Adjacent;
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::size_t target = 0;  // slot the proposer ends up in
    std::uint64_t version = 0;
    AgentId expect_lo;
    AgentId expect_hi;

    friend bool operator==(const SwapProposal&, const SwapProposal&) = default;
};

struct Trigger {
    AgentId from;
    std::string key_attribute;
    friend bool operator==(const Trigger&, const Trigger&) = default;
};

struct KeyExchange {
    AgentId from;
    KeyValue key;
    std::size_t position = 0;
    friend bool operator==(const KeyExchange&, const KeyExchange&) = default;
};

/// The neighbor on `side` is now `neighbor` (none at a list boundary); the
/// receiver now sits at `position` as of list `version`.
struct NeighborChanged {
    AgentId from;
    Side side = Side::Prev;
    std::optional<AgentId> neighbor;
    std::optional<KeyValue> key;
    std::size_t position = 0;
    std::uint64_t version = 0;
    friend bool operator==(const NeighborChanged&, const NeighborChanged&) = default;
};

struct SwapGranted {
    AgentId from;
    std::uint64_t proposal_id = 0;
    friend bool operator==(const SwapGranted&, const SwapGranted&) = default;
};

// Asleep: the other party is suspended with a wake-up still in flight.
enum class DenyReason { Conflict, Stale, Asleep };

struct SwapDenied {
    AgentId from;
    std::uint64_t proposal_id = 0;
    DenyReason reason = DenyReason::Conflict;
    friend bool operator==(const SwapDenied&, const SwapDenied&) = default;
};

/// Agent -> sorting list.
struct Propose {
    AgentId from;
    SwapProposal proposal;
    friend bool operator==(const Propose&, const Propose&) = default;
};

using Message =
    std::variant<Trigger, KeyExchange, NeighborChanged, SwapGranted, SwapDenied, Propose>;

AgentId sender_of(const Message& message);

std::string_view to_string(DenyReason reason);
std::optional<DenyReason> parse_deny_reason(std::string_view text);

}  // namespace selfsort

template <>
struct std::hash<selfsort::AgentId> {
    std::size_t operator()(const selfsort::AgentId& id) const noexcept {
        return std::hash<std::uint32_t>{}(id.value);
    }
};

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "selfsort/key_value.hpp"
#include "selfsort/message.hpp"

namespace selfsort {

enum class AgentStatus { Idle, Sorting, Suspended };

enum class AgentAction {
    IgnoreTrigger,
    SetPrevSorted,
    SetNextSorted,
    ProposeSwapWithPrev,
    ProposeSwapWithNext,
    ProposeAroundPivot,
    Suspend,
    Wait,
};

/// Which sides of a (prev, self, next) neighborhood are out of order.
enum class SwapDemand { None, PrevOnly, NextOnly, AroundPivot };

struct NeighborhoodSnapshot {
    std::optional<KeyValue> prev_key;
    KeyValue self_key;
    std::optional<KeyValue> next_key;
    std::uint64_t taken_at_step = 0;
};

struct AgentState {
    AgentId id;
    KeyValue key_value;
    std::optional<AgentId> prev_neighbor;
    std::optional<AgentId> next_neighbor;
    bool prev_sorted = false;
    bool next_sorted = false;
    std::size_t position = 0;
    std::optional<NeighborhoodSnapshot> snapshot;
    AgentStatus status = AgentStatus::Idle;

    // What the agent has heard about its neighbors' keys.
    std::optional<KeyValue> prev_key;
    std::optional<KeyValue> next_key;
    std::optional<std::uint64_t> pending_proposal;
    // List version of the newest NeighborChanged applied per side; older ones
    // can overtake on separate transport sessions and are dropped.
    std::uint64_t prev_version = 0;
    std::uint64_t next_version = 0;
    bool trigger_ignored = false;
    std::uint64_t evaluations = 0;
};

// Pure protocol decisions.

AgentAction on_trigger(const AgentState& state, const std::string& key_attribute,
                       const std::set<std::string>& attributes);

AgentAction evaluate_prev(const KeyValue& self_key, const KeyValue& prev_key,
                          SortDirection direction);

AgentAction evaluate_next(const KeyValue& self_key, const KeyValue& next_key,
                          SortDirection direction);

/// Throws std::invalid_argument when both neighbor keys are absent.
SwapDemand classify_triple(const std::optional<KeyValue>& prev_key, const KeyValue& self_key,
                           const std::optional<KeyValue>& next_key, SortDirection direction);

/// True iff the neighborhood has not moved between two evaluations.
bool detect_deadlock(const std::optional<NeighborhoodSnapshot>& old_snapshot,
                     const NeighborhoodSnapshot& new_snapshot);

/// Deadlocked pivots yield to their preceding neighbor; the next side is
/// re-evaluated after that swap lands.
AgentAction resolve_deadlock(const AgentState& state);

/// Clears the sorted flag for `side`, wakes the agent and re-evaluates that
/// side. A missing `new_key` means the agent is now at the list boundary.
AgentAction on_neighbor_changed(AgentState& state, Side side,
                                const std::optional<KeyValue>& new_key, SortDirection direction);

inline bool should_suspend(const AgentState& state) {
    return state.prev_sorted && state.next_sorted;
}

/// Exchange an agent asks the sorting list for, before it gets an id/version.
struct ProposalRequest {
    ProposalKind kind = ProposalKind::Adjacent;
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::size_t target = 0;
    AgentId expect_lo;
    AgentId expect_hi;
};

struct Outgoing {
    AgentId to;
    Message message;
};

/// Everything one message handler produced.
struct Reaction {
    std::vector<AgentAction> actions;
    std::vector<Outgoing> outbox;
    std::optional<ProposalRequest> proposal;
    std::optional<NeighborhoodSnapshot> deadlock;
};

/// One self-sorting record. Owns its state; talks to the world only through
/// the Reaction it returns.
class Agent {
public:
    Agent(AgentId id, KeyValue key, std::shared_ptr<const std::set<std::string>> attributes,
          SortDirection direction);

    void link(std::optional<AgentId> prev, std::optional<AgentId> next, std::size_t position);

    Reaction handle(const Message& message);

    /// Called by the transport once the proposal from the last Reaction has
    /// been assigned an id.
    void proposal_submitted(std::uint64_t proposal_id);

    const AgentState& state() const noexcept { return state_; }
    AgentId id() const noexcept { return state_.id; }

    /// Settled agents take no further part unless a neighbor wakes them.
    bool settled() const noexcept {
        return state_.trigger_ignored || state_.status == AgentStatus::Suspended;
    }

private:
    void on_trigger_message(const Trigger& m, Reaction& r);
    void on_key_exchange(const KeyExchange& m, Reaction& r);
    void on_neighbor_message(const NeighborChanged& m, Reaction& r);
    void on_verdict(std::uint64_t proposal_id, std::optional<DenyReason> denied, Reaction& r);
    void evaluate(Reaction& r);
    void propose(AgentAction action, Reaction& r);

    AgentState state_;
    std::shared_ptr<const std::set<std::string>> attributes_;
    SortDirection direction_;
};

std::string_view to_string(AgentAction action);
std::string_view to_string(AgentStatus status);
std::string_view to_string(SwapDemand demand);

}  // namespace selfsort

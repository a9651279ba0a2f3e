#include "selfsort/agent.hpp"

#include <algorithm>
#include <stdexcept>

#include "selfsort/errors.hpp"

namespace selfsort {

AgentAction on_trigger(const AgentState& state, const std::string& key_attribute,
                       const std::set<std::string>& attributes) {
    if (!attributes.contains(key_attribute)) return AgentAction::IgnoreTrigger;
    if (!state.prev_neighbor && !state.next_neighbor) return AgentAction::IgnoreTrigger;
    if (!state.prev_neighbor) return AgentAction::SetPrevSorted;
    if (!state.next_neighbor) return AgentAction::SetNextSorted;
    return AgentAction::Wait;  // interior: both sides wait for key exchange
}

AgentAction evaluate_prev(const KeyValue& self_key, const KeyValue& prev_key,
                          SortDirection direction) {
    return in_order(prev_key, self_key, direction) ? AgentAction::SetPrevSorted
                                                   : AgentAction::ProposeSwapWithPrev;
}

AgentAction evaluate_next(const KeyValue& self_key, const KeyValue& next_key,
                          SortDirection direction) {
    return in_order(self_key, next_key, direction) ? AgentAction::SetNextSorted
                                                   : AgentAction::ProposeSwapWithNext;
}

SwapDemand classify_triple(const std::optional<KeyValue>& prev_key, const KeyValue& self_key,
                           const std::optional<KeyValue>& next_key, SortDirection direction) {
    if (!prev_key && !next_key) {
        throw std::invalid_argument("classify_triple needs at least one neighbor key");
    }
    const bool prev_bad = prev_key && !in_order(*prev_key, self_key, direction);
    const bool next_bad = next_key && !in_order(self_key, *next_key, direction);
    if (prev_bad && next_bad) return SwapDemand::AroundPivot;
    if (prev_bad) return SwapDemand::PrevOnly;
    if (next_bad) return SwapDemand::NextOnly;
    return SwapDemand::None;
}

bool detect_deadlock(const std::optional<NeighborhoodSnapshot>& old_snapshot,
                     const NeighborhoodSnapshot& new_snapshot) {
    if (!old_snapshot) return false;
    if (old_snapshot->taken_at_step >= new_snapshot.taken_at_step) {
        throw std::invalid_argument("snapshots must be compared oldest first");
    }
    return old_snapshot->prev_key == new_snapshot.prev_key &&
           old_snapshot->self_key == new_snapshot.self_key &&
           old_snapshot->next_key == new_snapshot.next_key;
}

AgentAction resolve_deadlock(const AgentState& state) {
    if (!state.prev_neighbor) {
        throw ProtocolFault("deadlock resolution requires a preceding neighbor");
    }
    return AgentAction::ProposeSwapWithPrev;
}

AgentAction on_neighbor_changed(AgentState& state, Side side,
                                const std::optional<KeyValue>& new_key, SortDirection direction) {
    if (state.status != AgentStatus::Idle) state.status = AgentStatus::Sorting;
    if (side == Side::Prev) {
        state.prev_sorted = false;
        if (!new_key) {
            state.prev_sorted = true;
            return AgentAction::SetPrevSorted;
        }
        return evaluate_prev(state.key_value, *new_key, direction);
    }
    state.next_sorted = false;
    if (!new_key) {
        state.next_sorted = true;
        return AgentAction::SetNextSorted;
    }
    return evaluate_next(state.key_value, *new_key, direction);
}

Agent::Agent(AgentId id, KeyValue key, std::shared_ptr<const std::set<std::string>> attributes,
             SortDirection direction)
    : attributes_(std::move(attributes)), direction_(direction) {
    state_.id = id;
    state_.key_value = std::move(key);
    if (!attributes_) attributes_ = std::make_shared<const std::set<std::string>>();
}

void Agent::link(std::optional<AgentId> prev, std::optional<AgentId> next, std::size_t position) {
    state_.prev_neighbor = prev;
    state_.next_neighbor = next;
    state_.position = position;
}

Reaction Agent::handle(const Message& message) {
    Reaction r;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Trigger>) {
                on_trigger_message(m, r);
            } else if constexpr (std::is_same_v<T, KeyExchange>) {
                on_key_exchange(m, r);
            } else if constexpr (std::is_same_v<T, NeighborChanged>) {
                on_neighbor_message(m, r);
            } else if constexpr (std::is_same_v<T, SwapGranted>) {
                on_verdict(m.proposal_id, std::nullopt, r);
            } else if constexpr (std::is_same_v<T, SwapDenied>) {
                on_verdict(m.proposal_id, m.reason, r);
            } else {
                throw ProtocolFault("agents do not accept swap proposals");
            }
        },
        message);
    if (r.actions.empty()) r.actions.push_back(AgentAction::Wait);
    return r;
}

void Agent::proposal_submitted(std::uint64_t proposal_id) {
    if (!state_.pending_proposal) throw ProtocolFault("no proposal is awaiting an id");
    state_.pending_proposal = proposal_id;
}

void Agent::on_trigger_message(const Trigger& m, Reaction& r) {
    if (state_.status != AgentStatus::Idle || state_.trigger_ignored) return;
    const auto action = on_trigger(state_, m.key_attribute, *attributes_);
    r.actions.push_back(action);
    if (action == AgentAction::IgnoreTrigger) {
        state_.trigger_ignored = true;
        return;
    }
    state_.status = AgentStatus::Sorting;
    if (action == AgentAction::SetPrevSorted) state_.prev_sorted = true;
    if (action == AgentAction::SetNextSorted) state_.next_sorted = true;

    const KeyExchange hello{state_.id, state_.key_value, state_.position};
    if (state_.prev_neighbor) r.outbox.push_back({*state_.prev_neighbor, hello});
    if (state_.next_neighbor) r.outbox.push_back({*state_.next_neighbor, hello});
    evaluate(r);
}

void Agent::on_key_exchange(const KeyExchange& m, Reaction& r) {
    if (state_.status == AgentStatus::Idle || state_.trigger_ignored) return;
    bool learned = false;
    // Keys are immutable per agent, so anything we already hold is current.
    if (state_.prev_neighbor == m.from && !state_.prev_key) {
        state_.prev_key = m.key;
        learned = true;
    } else if (state_.next_neighbor == m.from && !state_.next_key) {
        state_.next_key = m.key;
        learned = true;
    }
    if (learned) evaluate(r);
}

void Agent::on_neighbor_message(const NeighborChanged& m, Reaction& r) {
    if (state_.trigger_ignored) return;
    auto& seen = m.side == Side::Prev ? state_.prev_version : state_.next_version;
    if (m.version < seen) return;
    seen = m.version;
    if (m.version >= std::max(state_.prev_version, state_.next_version)) state_.position = m.position;
    if (m.side == Side::Prev) {
        state_.prev_neighbor = m.neighbor;
        state_.prev_key = m.key;
    } else {
        state_.next_neighbor = m.neighbor;
        state_.next_key = m.key;
    }
    on_neighbor_changed(state_, m.side, m.key, direction_);
    evaluate(r);
}

void Agent::on_verdict(std::uint64_t proposal_id, std::optional<DenyReason> denied, Reaction& r) {
    if (state_.pending_proposal != proposal_id) return;  // verdict for a superseded proposal
    state_.pending_proposal.reset();
    if (!denied) {
        // Our new neighborhood arrives as NeighborChanged right behind the grant.
        state_.snapshot.reset();
        return;
    }
    // The sleeper proposes once woken; its move reaches us as NeighborChanged.
    if (*denied == DenyReason::Asleep) return;
    evaluate(r);
}

void Agent::evaluate(Reaction& r) {
    auto& s = state_;
    if (s.pending_proposal || s.status == AgentStatus::Idle) return;

    const bool has_prev = s.prev_neighbor.has_value();
    const bool has_next = s.next_neighbor.has_value();
    if (!has_prev) s.prev_sorted = true;
    if (!has_next) s.next_sorted = true;

    if (has_prev && has_next && s.prev_key && s.next_key) {
        ++s.evaluations;
        switch (classify_triple(s.prev_key, s.key_value, s.next_key, direction_)) {
            case SwapDemand::None:
                s.prev_sorted = s.next_sorted = true;
                s.snapshot.reset();
                r.actions.push_back(AgentAction::SetPrevSorted);
                r.actions.push_back(AgentAction::SetNextSorted);
                break;
            case SwapDemand::PrevOnly:
                s.next_sorted = true;
                s.snapshot.reset();
                r.actions.push_back(AgentAction::SetNextSorted);
                propose(AgentAction::ProposeSwapWithPrev, r);
                break;
            case SwapDemand::NextOnly:
                s.prev_sorted = true;
                s.snapshot.reset();
                r.actions.push_back(AgentAction::SetPrevSorted);
                propose(AgentAction::ProposeSwapWithNext, r);
                break;
            case SwapDemand::AroundPivot: {
                NeighborhoodSnapshot now{s.prev_key, s.key_value, s.next_key, s.evaluations};
                if (detect_deadlock(s.snapshot, now)) {
                    r.deadlock = now;
                    s.snapshot.reset();
                    propose(resolve_deadlock(s), r);
                } else {
                    s.snapshot = std::move(now);
                    propose(AgentAction::ProposeAroundPivot, r);
                }
                break;
            }
        }
    } else {
        s.snapshot.reset();
        if (has_prev && s.prev_key) {
            const auto a = evaluate_prev(s.key_value, *s.prev_key, direction_);
            if (a == AgentAction::SetPrevSorted) {
                s.prev_sorted = true;
                r.actions.push_back(a);
            } else {
                propose(a, r);
            }
        }
        if (has_next && s.next_key && !r.proposal) {
            const auto a = evaluate_next(s.key_value, *s.next_key, direction_);
            if (a == AgentAction::SetNextSorted) {
                s.next_sorted = true;
                r.actions.push_back(a);
            } else {
                propose(a, r);
            }
        }
    }

    if (!r.proposal && s.status == AgentStatus::Sorting && should_suspend(s)) {
        s.status = AgentStatus::Suspended;
        r.actions.push_back(AgentAction::Suspend);
    }
}

void Agent::propose(AgentAction action, Reaction& r) {
    auto& s = state_;
    ProposalRequest req;
    switch (action) {
        case AgentAction::ProposeSwapWithPrev:
            s.prev_sorted = false;
            req = {ProposalKind::Adjacent, s.position - 1, s.position, s.position - 1,
                   *s.prev_neighbor, s.id};
            break;
        case AgentAction::ProposeSwapWithNext:
            s.next_sorted = false;
            req = {ProposalKind::Adjacent, s.position, s.position + 1, s.position + 1, s.id,
                   *s.next_neighbor};
            break;
        case AgentAction::ProposeAroundPivot:
            s.prev_sorted = s.next_sorted = false;
            req = {ProposalKind::AroundPivot, s.position - 1, s.position + 1, s.position,
                   *s.prev_neighbor, *s.next_neighbor};
            break;
        default:
            throw ProtocolFault("not a proposal action");
    }
    r.actions.push_back(action);
    r.proposal = req;
    s.pending_proposal = 0;  // real id assigned by proposal_submitted
}

std::string_view to_string(AgentAction action) {
    switch (action) {
        case AgentAction::IgnoreTrigger: return "IgnoreTrigger";
        case AgentAction::SetPrevSorted: return "SetPrevSorted";
        case AgentAction::SetNextSorted: return "SetNextSorted";
        case AgentAction::ProposeSwapWithPrev: return "ProposeSwapWithPrev";
        case AgentAction::ProposeSwapWithNext: return "ProposeSwapWithNext";
        case AgentAction::ProposeAroundPivot: return "ProposeAroundPivot";
        case AgentAction::Suspend: return "Suspend";
        case AgentAction::Wait: return "Wait";
    }
    return "?";
}

std::string_view to_string(AgentStatus status) {
    switch (status) {
        case AgentStatus::Idle: return "Idle";
        case AgentStatus::Sorting: return "Sorting";
        case AgentStatus::Suspended: return "Suspended";
    }
    return "?";
}

std::string_view to_string(SwapDemand demand) {
    switch (demand) {
        case SwapDemand::None: return "None";
        case SwapDemand::PrevOnly: return "PrevOnly";
        case SwapDemand::NextOnly: return "NextOnly";
        case SwapDemand::AroundPivot: return "AroundPivot";
    }
    return "?";
}

std::string_view to_string(DenyReason reason) {
    switch (reason) {
        case DenyReason::Conflict: return "conflict";
        case DenyReason::Stale: return "stale";
        case DenyReason::Asleep: return "asleep";
    }
    return "?";
}

std::optional<DenyReason> parse_deny_reason(std::string_view text) {
    for (auto r : {DenyReason::Conflict, DenyReason::Stale, DenyReason::Asleep}) {
        if (text == to_string(r)) return r;
    }
    return std::nullopt;
}

AgentId sender_of(const Message& message) {
    return std::visit([](const auto& m) { return m.from; }, message);
}

}  // namespace selfsort

#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "selfsort/key_value.hpp"
#include "selfsort/message.hpp"

namespace selfsort {


struct Denial {
    SwapProposal proposal;
    DenyReason reason = DenyReason::Conflict;
};

struct ArbitrationResult {
    std::vector<SwapProposal> granted;
    std::vector<Denial> denied;
};

struct SwapOutcome {
    SwapProposal proposal;
    AgentId moved_lo;  // agent now at proposal.lo
    AgentId moved_hi;  // agent now at proposal.hi
    std::uint64_t version = 0;
    std::size_t list_size = 0;
    /// Occupants of the slots next to the swap, after it. Index 0 is the
    /// slot left of the footprint, then (for AroundPivot) the pivot, then
    /// the slot right of the footprint.
    std::optional<AgentId> outer_prev;
    std::optional<AgentId> pivot;
    std::optional<AgentId> outer_next;
};

/// Slots [lo, hi] a proposal must own exclusively: both swapped slots and,
/// for AroundPivot, the pivot between them.
std::pair<std::size_t, std::size_t> footprint(const SwapProposal& proposal);

/// Every agent whose neighborhood changed: the swapped pair, the pivot, and
/// the agents just outside the footprint.
std::vector<AgentId> affected_agents(const SwapOutcome& outcome);

class SortingList;

/// The three-step move through the temp slot, exposed one step at a time.
///   1. mover (slot lo occupant) goes to the temp slot; slot lo is empty
///   2. counterpart moves from hi into the vacated slot lo
///   3. mover leaves the temp slot for slot hi
class TempSlotSwap {
public:
    /// Returns false once all three steps are done.
    bool advance();
    bool done() const noexcept { return step_ == 3; }
    int step() const noexcept { return step_; }

private:
    friend class SortingList;
    TempSlotSwap(SortingList& list, SwapProposal proposal) : list_(&list), proposal_(proposal) {}

    SortingList* list_;
    SwapProposal proposal_;
    int step_ = 0;
};

/// Shared slot array (1-based). Every public member takes the internal lock,
/// so calls from concurrent agents linearize.
class SortingList {
public:
    explicit SortingList(SortDirection direction = SortDirection::Ascending)
        : direction_(direction) {}

    SortingList(const SortingList&) = delete;
    SortingList& operator=(const SortingList&) = delete;

    /// Appends; returns the 1-based slot. Throws SealedListError after seal().
    std::size_t insert(AgentId agent, KeyValue key);

    /// Freezes membership. Throws Refusal when fewer than two agents.
    void seal();
    bool sealed() const;

    std::size_t size() const;
    std::uint64_t version() const;
    SortDirection direction() const noexcept { return direction_; }

    /// Throws std::out_of_range outside [1, n].
    std::pair<std::optional<AgentId>, std::optional<AgentId>> neighbors_of(std::size_t position) const;

    std::optional<AgentId> occupant(std::size_t position) const;
    std::size_t position_of(AgentId agent) const;
    const KeyValue& key_of(AgentId agent) const;

    /// Stale (version moved, occupants differ, or pair already ordered)
    /// proposals are denied first. The rest go leftmost-first by footprint,
    /// ties to the lower proposer id; anything overlapping a grant is denied.
    /// A valid proposal whose other party is `asleep` is denied as Asleep.
    ArbitrationResult arbitrate(std::span<const SwapProposal> proposals,
                                const std::function<bool(AgentId)>& asleep = {}) const;

    /// Atomic exchange. Throws SwapAborted when the slots no longer hold the
    /// expected occupants.
    SwapOutcome apply_swap(const SwapProposal& proposal);

    /// Same exchange through the temp slot, under the lock as one operation.
    SwapOutcome apply_swap_via_temp(const SwapProposal& proposal);

    /// Step-wise temp-slot move; the list is transient until it finishes.
    TempSlotSwap begin_temp_swap(const SwapProposal& proposal);

    std::optional<AgentId> temp_slot() const;

    /// Throws TransientStateError while a temp-slot move is in progress.
    std::vector<std::pair<AgentId, KeyValue>> snapshot_order() const;

    template <typename F>
    auto with_lock(F&& f) const {
        std::lock_guard lock(mutex_);
        return f();
    }

private:
    friend class TempSlotSwap;

    bool valid_locked(const SwapProposal& p) const;
    void check_occupants_locked(const SwapProposal& p) const;
    SwapOutcome finish_locked(const SwapProposal& p);
    bool advance_temp_locked(TempSlotSwap& move);

    SortDirection direction_;
    mutable std::recursive_mutex mutex_;
    std::vector<std::optional<AgentId>> slots_;  // index 0 is slot 1
    std::optional<AgentId> temp_;
    std::unordered_map<AgentId, std::size_t> position_;
    std::unordered_map<AgentId, KeyValue> keys_;
    std::uint64_t version_ = 0;
    bool sealed_ = false;
};

}  // namespace selfsort

#include "selfsort/sorting_list.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "selfsort/errors.hpp"

namespace selfsort {

std::pair<std::size_t, std::size_t> footprint(const SwapProposal& proposal) {
    return {proposal.lo, proposal.hi};
}

std::vector<AgentId> affected_agents(const SwapOutcome& outcome) {
    std::vector<AgentId> out;
    if (outcome.outer_prev) out.push_back(*outcome.outer_prev);
    out.push_back(outcome.moved_lo);
    if (outcome.pivot) out.push_back(*outcome.pivot);
    out.push_back(outcome.moved_hi);
    if (outcome.outer_next) out.push_back(*outcome.outer_next);
    return out;
}

bool TempSlotSwap::advance() {
    std::lock_guard lock(list_->mutex_);
    return list_->advance_temp_locked(*this);
}

std::size_t SortingList::insert(AgentId agent, KeyValue key) {
    std::lock_guard lock(mutex_);
    if (sealed_) throw SealedListError("sorting list is sealed; membership is fixed once triggered");
    if (position_.contains(agent)) {
        throw std::invalid_argument("agent " + std::to_string(agent.value) + " already listed");
    }
    slots_.emplace_back(agent);
    position_[agent] = slots_.size();
    keys_.emplace(agent, std::move(key));
    return slots_.size();
}

void SortingList::seal() {
    std::lock_guard lock(mutex_);
    if (slots_.size() < 2) throw Refusal("Sorting list must contain at least two objects");
    sealed_ = true;
}

bool SortingList::sealed() const {
    std::lock_guard lock(mutex_);
    return sealed_;
}

std::size_t SortingList::size() const {
    std::lock_guard lock(mutex_);
    return slots_.size();
}

std::uint64_t SortingList::version() const {
    std::lock_guard lock(mutex_);
    return version_;
}

std::pair<std::optional<AgentId>, std::optional<AgentId>> SortingList::neighbors_of(
    std::size_t position) const {
    std::lock_guard lock(mutex_);
    const auto n = slots_.size();
    if (position < 1 || position > n) {
        throw std::out_of_range("position " + std::to_string(position) + " outside [1, " +
                                std::to_string(n) + "]");
    }
    std::optional<AgentId> prev, next;
    if (position > 1) prev = slots_[position - 2];
    if (position < n) next = slots_[position];
    return {prev, next};
}

std::optional<AgentId> SortingList::occupant(std::size_t position) const {
    std::lock_guard lock(mutex_);
    if (position < 1 || position > slots_.size()) {
        throw std::out_of_range("position " + std::to_string(position) + " out of range");
    }
    return slots_[position - 1];
}

std::size_t SortingList::position_of(AgentId agent) const {
    std::lock_guard lock(mutex_);
    return position_.at(agent);
}

const KeyValue& SortingList::key_of(AgentId agent) const {
    std::lock_guard lock(mutex_);
    return keys_.at(agent);
}

std::optional<AgentId> SortingList::temp_slot() const {
    std::lock_guard lock(mutex_);
    return temp_;
}

bool SortingList::valid_locked(const SwapProposal& p) const {
    if (temp_ || p.version != version_) return false;
    const auto n = slots_.size();
    const std::size_t width = p.kind == ProposalKind::Adjacent ? 1 : 2;
    if (p.lo < 1 || p.hi > n || p.hi != p.lo + width) return false;
    const auto& a = slots_[p.lo - 1];
    const auto& b = slots_[p.hi - 1];
    if (!a || !b || *a != p.expect_lo || *b != p.expect_hi) return false;
    const auto& ka = keys_.at(*a);
    const auto& kb = keys_.at(*b);
    if (p.kind == ProposalKind::Adjacent) {
        if (p.proposer != *a && p.proposer != *b) return false;
        return !in_order(ka, kb, direction_);
    }
    const auto& pivot = slots_[p.lo];
    if (!pivot || *pivot != p.proposer) return false;
    const auto& kp = keys_.at(*pivot);
    return !in_order(ka, kp, direction_) && !in_order(kp, kb, direction_);
}

ArbitrationResult SortingList::arbitrate(std::span<const SwapProposal> proposals,
                                         const std::function<bool(AgentId)>& asleep) const {
    std::lock_guard lock(mutex_);
    ArbitrationResult result;
    std::vector<SwapProposal> candidates;
    auto sleeping = [&](AgentId who, const SwapProposal& p) {
        return asleep && who != p.proposer && asleep(who);
    };
    for (const auto& p : proposals) {
        if (!valid_locked(p)) {
            result.denied.push_back({p, DenyReason::Stale});
        } else if (sleeping(p.expect_lo, p) || sleeping(p.expect_hi, p)) {
            result.denied.push_back({p, DenyReason::Asleep});
        } else {
            candidates.push_back(p);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const SwapProposal& x, const SwapProposal& y) {
                         if (x.lo != y.lo) return x.lo < y.lo;
                         if (x.proposer != y.proposer) return x.proposer < y.proposer;
                         return x.id < y.id;
                     });
    std::vector<std::pair<std::size_t, std::size_t>> taken;
    for (const auto& p : candidates) {
        const auto [lo, hi] = footprint(p);
        const bool clash = std::any_of(taken.begin(), taken.end(), [&](const auto& t) {
            return lo <= t.second && t.first <= hi;
        });
        if (clash) {
            result.denied.push_back({p, DenyReason::Conflict});
        } else {
            taken.emplace_back(lo, hi);
            result.granted.push_back(p);
        }
    }
    return result;
}

void SortingList::check_occupants_locked(const SwapProposal& p) const {
    if (temp_) throw SwapAborted("temp slot busy");
    if (p.lo < 1 || p.hi > slots_.size() || p.lo >= p.hi) throw SwapAborted("bad slots");
    if (slots_[p.lo - 1] != p.expect_lo || slots_[p.hi - 1] != p.expect_hi) {
        throw SwapAborted("slots " + std::to_string(p.lo) + "," + std::to_string(p.hi) +
                          " changed since proposal " + std::to_string(p.id));
    }
}

SwapOutcome SortingList::finish_locked(const SwapProposal& p) {
    ++version_;
    const auto a = *slots_[p.lo - 1];
    const auto b = *slots_[p.hi - 1];
    position_[a] = p.lo;
    position_[b] = p.hi;
    SwapOutcome out{p, a, b, version_, slots_.size(), std::nullopt, std::nullopt, std::nullopt};
    if (p.lo > 1) out.outer_prev = slots_[p.lo - 2];
    if (p.kind == ProposalKind::AroundPivot) out.pivot = slots_[p.lo];
    if (p.hi < slots_.size()) out.outer_next = slots_[p.hi];
    return out;
}

SwapOutcome SortingList::apply_swap(const SwapProposal& proposal) {
    std::lock_guard lock(mutex_);
    check_occupants_locked(proposal);
    std::swap(slots_[proposal.lo - 1], slots_[proposal.hi - 1]);
    return finish_locked(proposal);
}

SwapOutcome SortingList::apply_swap_via_temp(const SwapProposal& proposal) {
    std::lock_guard lock(mutex_);
    auto move = begin_temp_swap(proposal);
    while (move.advance()) {
    }
    const auto p = proposal;
    // finish_locked ran inside the last advance(); rebuild the outcome.
    SwapOutcome out{p, *slots_[p.lo - 1], *slots_[p.hi - 1], version_, slots_.size(),
                    std::nullopt, std::nullopt, std::nullopt};
    if (p.lo > 1) out.outer_prev = slots_[p.lo - 2];
    if (p.kind == ProposalKind::AroundPivot) out.pivot = slots_[p.lo];
    if (p.hi < slots_.size()) out.outer_next = slots_[p.hi];
    return out;
}

TempSlotSwap SortingList::begin_temp_swap(const SwapProposal& proposal) {
    std::lock_guard lock(mutex_);
    check_occupants_locked(proposal);
    return TempSlotSwap(*this, proposal);
}

bool SortingList::advance_temp_locked(TempSlotSwap& move) {
    const auto& p = move.proposal_;
    switch (move.step_) {
        case 0:
            // Mover leaves its slot for the temp cell.
            temp_ = slots_[p.lo - 1];
            slots_[p.lo - 1].reset();
            break;
        case 1:
            slots_[p.lo - 1] = slots_[p.hi - 1];
            slots_[p.hi - 1].reset();
            break;
        case 2:
            slots_[p.hi - 1] = temp_;
            temp_.reset();
            finish_locked(p);
            break;
        default:
            return false;
    }
    ++move.step_;
    return move.step_ < 3;
}

std::vector<std::pair<AgentId, KeyValue>> SortingList::snapshot_order() const {
    std::lock_guard lock(mutex_);
    if (temp_) throw TransientStateError("snapshot taken during a temp-slot move");
    std::vector<std::pair<AgentId, KeyValue>> out;
    out.reserve(slots_.size());
    for (const auto& s : slots_) out.emplace_back(*s, keys_.at(*s));
    return out;
}

}  // namespace selfsort

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfsort/key_value.hpp"

namespace selfsort {

struct RunStats {
    std::uint64_t swaps = 0;
    std::uint64_t adjacent_swaps = 0;
    std::uint64_t pivot_swaps = 0;
    std::uint64_t messages = 0;
    std::uint64_t steps = 0;
    std::uint64_t deadlocks_resolved = 0;
    std::uint64_t initial_inversions = 0;
    double wall_time = 0.0;  // seconds
};

/// Single line of key=value pairs separated by spaces.
std::string format_stats(const RunStats& stats);

/// Reference sort: stable, shares the KeyValue comparator with the agents.
std::vector<KeyValue> oracle_sort(std::span<const KeyValue> keys, SortDirection direction);

/// Indices of `keys` in oracle order.
std::vector<std::size_t> oracle_order(std::span<const KeyValue> keys, SortDirection direction);

/// Pairs i < j with keys[i] strictly after keys[j]. Merge-sort count.
std::uint64_t inversions(std::span<const KeyValue> keys, SortDirection direction);

/// True iff both sequences have the same key in every position up to
/// equality classes. Throws std::logic_error when the multisets differ.
bool equivalent_up_to_ties(std::span<const KeyValue> actual, std::span<const KeyValue> expected);

}  // namespace selfsort

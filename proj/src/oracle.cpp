#include "selfsort/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace selfsort {

std::string format_stats(const RunStats& s) {
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.6f", s.wall_time);
    return "swaps=" + std::to_string(s.swaps) + " adjacent_swaps=" + std::to_string(s.adjacent_swaps) +
           " pivot_swaps=" + std::to_string(s.pivot_swaps) + " messages=" + std::to_string(s.messages) +
           " steps=" + std::to_string(s.steps) +
           " deadlocks_resolved=" + std::to_string(s.deadlocks_resolved) +
           " initial_inversions=" + std::to_string(s.initial_inversions) + " wall_time=" + wall;
}

std::vector<std::size_t> oracle_order(std::span<const KeyValue> keys, SortDirection direction) {
    std::vector<std::size_t> idx(keys.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return compare_keys(keys[a], keys[b], direction) < 0;
    });
    return idx;
}

std::vector<KeyValue> oracle_sort(std::span<const KeyValue> keys, SortDirection direction) {
    std::vector<KeyValue> out;
    out.reserve(keys.size());
    for (auto i : oracle_order(keys, direction)) out.push_back(keys[i]);
    return out;
}

namespace {

std::uint64_t count_merge(std::vector<const KeyValue*>& v, std::vector<const KeyValue*>& tmp,
                          std::size_t lo, std::size_t hi, SortDirection dir) {
    if (hi - lo < 2) return 0;
    const auto mid = lo + (hi - lo) / 2;
    std::uint64_t count = count_merge(v, tmp, lo, mid, dir) + count_merge(v, tmp, mid, hi, dir);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (compare_keys(*v[j], *v[i], dir) < 0) {
            count += mid - i;  // v[j] jumps every remaining left element
            tmp[k++] = v[j++];
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
              tmp.begin() + static_cast<std::ptrdiff_t>(hi), v.begin() + static_cast<std::ptrdiff_t>(lo));
    return count;
}

}  // namespace

std::uint64_t inversions(std::span<const KeyValue> keys, SortDirection direction) {
    std::vector<const KeyValue*> v;
    v.reserve(keys.size());
    for (const auto& k : keys) v.push_back(&k);
    std::vector<const KeyValue*> tmp(v.size());
    return count_merge(v, tmp, 0, v.size(), direction);
}

bool equivalent_up_to_ties(std::span<const KeyValue> actual, std::span<const KeyValue> expected) {
    auto sorted_a = oracle_sort(actual, SortDirection::Ascending);
    auto sorted_e = oracle_sort(expected, SortDirection::Ascending);
    bool same_multiset = sorted_a.size() == sorted_e.size();
    for (std::size_t i = 0; same_multiset && i < sorted_a.size(); ++i) {
        same_multiset = same_class(sorted_a[i], sorted_e[i]);
    }
    if (!same_multiset) {
        throw std::logic_error("key multisets differ; permutation invariant broken upstream");
    }
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!same_class(actual[i], expected[i])) return false;
    }
    return true;
}

}  // namespace selfsort

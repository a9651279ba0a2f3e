#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfsort/key_value.hpp"
#include "selfsort/simulation.hpp"

namespace selfsort {

enum class Distribution { Random, Sorted, Reversed };

std::string_view to_string(Distribution dist);
std::optional<Distribution> parse_distribution(std::string_view text);

/// n distinct numeric keys 1..n, arranged per `dist`.
std::vector<KeyValue> make_input(std::size_t n, Distribution dist, std::mt19937_64& rng);

struct Summary {
    double mean = 0;
    double max = 0;
};

struct BenchRow {
    std::size_t n = 0;
    Distribution dist = Distribution::Random;
    std::size_t trials = 0;
    std::size_t nonterminating = 0;
    Summary swaps, adjacent_swaps, pivot_swaps, messages, steps, deadlocks, inversions, wall_time;
};

struct BenchConfig {
    std::vector<std::size_t> sizes;
    std::vector<Distribution> dists{Distribution::Random, Distribution::Sorted, Distribution::Reversed};
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    SortDirection direction = SortDirection::Ascending;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs every (size, dist) cell `trials` times. Trial inputs and scheduler
/// seeds depend only on (seed, n, dist, trial), so results do not depend on
/// the thread count, apart from wall time.
std::vector<BenchRow> run_benchmark(const BenchConfig& config);

std::string format_table(std::span<const BenchRow> rows);
std::string format_jsonl(std::span<const BenchRow> rows);

}  // namespace selfsort

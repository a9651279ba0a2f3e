#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "selfsort/bench.hpp"
#include "selfsort/oracle.hpp"

using namespace selfsort;

namespace {

KeyValue N(double v) { return KeyValue::numeric(v); }

std::vector<KeyValue> numbers(std::initializer_list<double> xs) {
    std::vector<KeyValue> out;
    for (auto x : xs) out.push_back(N(x));
    return out;
}

std::uint64_t brute_inversions(const std::vector<KeyValue>& ks, SortDirection dir) {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        for (std::size_t j = i + 1; j < ks.size(); ++j) {
            if (compare_keys(ks[j], ks[i], dir) < 0) ++n;
        }
    }
    return n;
}

}  // namespace

TEST_CASE("oracle_sort") {
    CHECK(oracle_sort(numbers({6, 5, 4, 3}), SortDirection::Ascending) == numbers({3, 4, 5, 6}));
    CHECK(oracle_sort(std::vector<KeyValue>{}, SortDirection::Ascending).empty());

    // Stable: two 59.60 literals that differ only in spelling keep their order.
    const std::vector<KeyValue> tie{*KeyValue::from_numeric_literal("59.60"),
                                    *KeyValue::from_numeric_literal("59.6"),
                                    *KeyValue::from_numeric_literal("59.30")};
    CHECK(oracle_sort(tie, SortDirection::Descending) == tie);
}

TEST_CASE("inversions") {
    CHECK(inversions(numbers({3, 4, 5, 6}), SortDirection::Ascending) == 0);
    CHECK(inversions(numbers({6, 5, 4, 3}), SortDirection::Ascending) == 6);
    CHECK(inversions(numbers({5, 5}), SortDirection::Ascending) == 0);
    CHECK(inversions(numbers({6, 5, 4, 3}), SortDirection::Descending) == 0);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<KeyValue> ks;
        const auto n = rng() % 40;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = rng() % 10;
            ks.push_back(r == 0   ? KeyValue::missing()
                         : r == 1 ? KeyValue::text(std::string(1, static_cast<char>('a' + rng() % 4)))
                                  : N(static_cast<double>(rng() % 8)));
        }
        for (auto dir : {SortDirection::Ascending, SortDirection::Descending}) {
            CHECK(inversions(ks, dir) == brute_inversions(ks, dir));
        }
    }
}

TEST_CASE("equivalent_up_to_ties") {
    CHECK(equivalent_up_to_ties(numbers({1, 2}), numbers({1, 2})));
    CHECK_FALSE(equivalent_up_to_ties(numbers({1, 3, 2}), numbers({1, 2, 3})));
    const std::vector<KeyValue> a{*KeyValue::from_numeric_literal("59.60"),
                                  *KeyValue::from_numeric_literal("59.6")};
    const std::vector<KeyValue> b{a[1], a[0]};
    CHECK(equivalent_up_to_ties(a, b));
    CHECK_THROWS_AS(equivalent_up_to_ties(numbers({1, 2}), numbers({1, 3})), std::logic_error);
}

TEST_CASE("format_stats is one key=value line") {
    RunStats s;
    s.swaps = 3;
    s.initial_inversions = 5;
    const auto line = format_stats(s);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.rfind("swaps=3 ", 0) == 0);
    CHECK(line.find("initial_inversions=5") != std::string::npos);
}

TEST_CASE("make_input") {
    std::mt19937_64 rng(1);
    auto sorted = make_input(5, Distribution::Sorted, rng);
    CHECK(sorted == numbers({1, 2, 3, 4, 5}));
    CHECK(make_input(4, Distribution::Reversed, rng) == numbers({4, 3, 2, 1}));
    auto random = make_input(50, Distribution::Random, rng);
    auto check = oracle_sort(random, SortDirection::Ascending);
    CHECK(check == make_input(50, Distribution::Sorted, rng));
}

TEST_CASE("benchmark bounds") {
    BenchConfig cfg;
    cfg.sizes = {16, 8};
    cfg.trials = 4;
    const auto rows = run_benchmark(cfg);
    REQUIRE(rows.size() == 6);
    CHECK(rows.front().n == 8);
    for (const auto& r : rows) {
        CHECK(r.nonterminating == 0);
        const double n = static_cast<double>(r.n);
        if (r.dist == Distribution::Sorted) CHECK(r.swaps.max == 0);
        if (r.dist == Distribution::Reversed) {
            CHECK(r.inversions.mean == n * (n - 1) / 2);
            CHECK(r.swaps.mean >= n * (n - 1) / 6);
            CHECK(r.swaps.max <= n * (n - 1) / 2);
        }
        // Adjacent swaps remove one inversion, pivot swaps three.
        CHECK(r.adjacent_swaps.mean + 3 * r.pivot_swaps.mean == doctest::Approx(r.inversions.mean));
    }
    CHECK(format_table(rows).find("reversed") != std::string::npos);
    const auto jsonl = format_jsonl(rows);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 6);

    cfg.trials = 0;
    CHECK_THROWS_AS(run_benchmark(cfg), std::invalid_argument);
}

TEST_CASE("random inputs carry about n(n-1)/4 inversions") {
    BenchConfig cfg;
    cfg.sizes = {32};
    cfg.dists = {Distribution::Random};
    cfg.trials = 50;
    const auto rows = run_benchmark(cfg);
    REQUIRE(rows.size() == 1);
    const double expected = 32.0 * 31.0 / 4.0;
    CHECK(rows[0].inversions.mean == doctest::Approx(expected).epsilon(0.15));
    CHECK(rows[0].swaps.mean <= rows[0].inversions.mean);
}

TEST_CASE("benchmark results do not depend on thread count") {
    BenchConfig cfg;
    cfg.sizes = {12};
    cfg.trials = 6;
    cfg.threads = 1;
    const auto one = run_benchmark(cfg);
    cfg.threads = 4;
    const auto four = run_benchmark(cfg);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].swaps.mean == four[i].swaps.mean);
        CHECK(one[i].messages.mean == four[i].messages.mean);
        CHECK(one[i].steps.max == four[i].steps.max);
    }
}

TEST_CASE("steps on sorted inputs grow no faster than linearly") {
    BenchConfig cfg;
    cfg.sizes = {10, 100};
    cfg.dists = {Distribution::Sorted};
    cfg.trials = 3;
    const auto rows = run_benchmark(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].steps.mean <= rows[0].steps.mean * 10 * 1.1);
}

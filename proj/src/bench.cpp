#include "selfsort/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace selfsort {

namespace {

struct Sample {
    bool terminated = false;
    RunStats stats;
};

std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, Distribution dist, std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(dist),
                      static_cast<std::uint32_t>(trial)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (std::uint64_t{out[0]} << 32) | out[1];
}

Summary summarize(const std::vector<Sample>& samples, double (*field)(const RunStats&)) {
    Summary s;
    std::size_t count = 0;
    for (const auto& sample : samples) {
        if (!sample.terminated) continue;
        const auto v = field(sample.stats);
        s.mean += v;
        s.max = std::max(s.max, v);
        ++count;
    }
    if (count) s.mean /= static_cast<double>(count);
    return s;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace

std::string_view to_string(Distribution dist) {
    switch (dist) {
        case Distribution::Random: return "random";
        case Distribution::Sorted: return "sorted";
        case Distribution::Reversed: return "reversed";
    }
    return "?";
}

std::optional<Distribution> parse_distribution(std::string_view text) {
    if (text == "random") return Distribution::Random;
    if (text == "sorted") return Distribution::Sorted;
    if (text == "reversed") return Distribution::Reversed;
    return std::nullopt;
}

std::vector<KeyValue> make_input(std::size_t n, Distribution dist, std::mt19937_64& rng) {
    std::vector<std::size_t> values(n);
    std::iota(values.begin(), values.end(), std::size_t{1});
    if (dist == Distribution::Reversed) std::reverse(values.begin(), values.end());
    if (dist == Distribution::Random) std::shuffle(values.begin(), values.end(), rng);
    std::vector<KeyValue> keys;
    keys.reserve(n);
    for (auto v : values) keys.push_back(KeyValue::numeric(static_cast<double>(v)));
    return keys;
}

std::vector<BenchRow> run_benchmark(const BenchConfig& config) {
    struct Cell {
        std::size_t n;
        Distribution dist;
    };
    if (config.trials == 0) throw std::invalid_argument("trials must be at least 1");
    auto sizes = config.sizes;
    std::sort(sizes.begin(), sizes.end());
    std::vector<Cell> cells;
    for (auto n : sizes) {
        for (auto d : config.dists) cells.push_back({n, d});
    }
    const std::size_t total = cells.size() * config.trials;
    std::vector<Sample> samples(total);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto job = next++; job < total; job = next++) {
            const auto& cell = cells[job / config.trials];
            const auto trial = job % config.trials;
            std::mt19937_64 rng(trial_seed(config.seed, cell.n, cell.dist, trial));
            const auto keys = make_input(cell.n, cell.dist, rng);
            RunConfig rc;
            rc.seed = rng();
            rc.direction = config.direction;
            rc.record_trace = false;
            try {
                auto result = run_sort(keys, rc);
                samples[job] = {true, result.stats};
            } catch (const NonTermination& e) {
                samples[job] = {false, e.stats()};
            }
        }
    };
    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<BenchRow> rows;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<Sample> cell_samples(samples.begin() + static_cast<std::ptrdiff_t>(c * config.trials),
                                         samples.begin() + static_cast<std::ptrdiff_t>((c + 1) * config.trials));
        BenchRow row;
        row.n = cells[c].n;
        row.dist = cells[c].dist;
        row.trials = config.trials;
        row.nonterminating = static_cast<std::size_t>(std::count_if(
            cell_samples.begin(), cell_samples.end(), [](const Sample& s) { return !s.terminated; }));
        row.swaps = summarize(cell_samples, [](const RunStats& s) { return double(s.swaps); });
        row.adjacent_swaps = summarize(cell_samples, [](const RunStats& s) { return double(s.adjacent_swaps); });
        row.pivot_swaps = summarize(cell_samples, [](const RunStats& s) { return double(s.pivot_swaps); });
        row.messages = summarize(cell_samples, [](const RunStats& s) { return double(s.messages); });
        row.steps = summarize(cell_samples, [](const RunStats& s) { return double(s.steps); });
        row.deadlocks = summarize(cell_samples, [](const RunStats& s) { return double(s.deadlocks_resolved); });
        row.inversions = summarize(cell_samples, [](const RunStats& s) { return double(s.initial_inversions); });
        row.wall_time = summarize(cell_samples, [](const RunStats& s) { return s.wall_time; });
        rows.push_back(row);
    }
    return rows;
}

std::string format_table(std::span<const BenchRow> rows) {
    const std::vector<std::string> headers{"n",          "dist",      "trials",    "swaps_mean", "swaps_max",
                                           "pivot_mean", "msgs_mean", "steps_mean", "deadlocks",  "inv_mean",
                                           "wall_ms",    "nonterm"};
    std::vector<std::vector<std::string>> table{headers};
    for (const auto& r : rows) {
        table.push_back({std::to_string(r.n), std::string(to_string(r.dist)), std::to_string(r.trials),
                         fixed(r.swaps.mean, 1), fixed(r.swaps.max, 0), fixed(r.pivot_swaps.mean, 1),
                         fixed(r.messages.mean, 1), fixed(r.steps.mean, 1), fixed(r.deadlocks.mean, 2),
                         fixed(r.inversions.mean, 1), fixed(r.wall_time.mean * 1e3, 3),
                         std::to_string(r.nonterminating)});
    }
    std::vector<std::size_t> width(headers.size(), 0);
    for (const auto& line : table) {
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    std::string out;
    for (const auto& line : table) {
        std::string text;
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) text += "  ";
            const bool left = c == 1;
            if (!left) text.append(width[c] - line[c].size(), ' ');
            text += line[c];
            if (left) text.append(width[c] - line[c].size(), ' ');
        }
        out += text + '\n';
    }
    return out;
}

std::string format_jsonl(std::span<const BenchRow> rows) {
    auto summary = [](const Summary& s) { return nlohmann::json{{"mean", s.mean}, {"max", s.max}}; };
    std::string out;
    for (const auto& r : rows) {
        nlohmann::json j{{"n", r.n},
                         {"dist", to_string(r.dist)},
                         {"trials", r.trials},
                         {"nonterminating", r.nonterminating},
                         {"swaps", summary(r.swaps)},
                         {"adjacent_swaps", summary(r.adjacent_swaps)},
                         {"pivot_swaps", summary(r.pivot_swaps)},
                         {"messages", summary(r.messages)},
                         {"steps", summary(r.steps)},
                         {"deadlocks_resolved", summary(r.deadlocks)},
                         {"initial_inversions", summary(r.inversions)},
                         {"wall_time", summary(r.wall_time)}};
        out += j.dump() + '\n';
    }
    return out;
}

}  // namespace selfsort

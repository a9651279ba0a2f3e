#include "selfsort/cli.hpp"

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selfsort/bench.hpp"
#include "selfsort/errors.hpp"
#include "selfsort/records.hpp"
#include "selfsort/report.hpp"
#include "selfsort/simulation.hpp"

namespace selfsort {

namespace {

struct EngineFlags {
    std::uint64_t seed = 1;
    std::uint64_t max_steps = 0;
    std::string mode = "sim";
    std::string transport = "mem";

    RunConfig config(SortDirection dir) const {
        RunConfig rc;
        rc.seed = seed;
        rc.max_steps = max_steps;
        rc.mode = mode == "concurrent" ? RunMode::Concurrent : RunMode::Deterministic;
        rc.transport = transport == "loopback" ? TransportKind::Loopback : TransportKind::InMemory;
        rc.direction = dir;
        return rc;
    }
};

void add_engine_flags(CLI::App* cmd, EngineFlags& f) {
    cmd->add_option("--seed", f.seed, "scheduler seed");
    cmd->add_option("--max-steps", f.max_steps, "scheduler budget (0: 50*n^2)");
    cmd->add_option("--mode", f.mode, "sim or concurrent")->check(CLI::IsMember({"sim", "concurrent"}));
    cmd->add_option("--transport", f.transport, "mem or loopback")
        ->check(CLI::IsMember({"mem", "loopback"}));
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

SortDirection direction_or(const std::string& text, SortDirection fallback) {
    if (text.empty()) return fallback;
    auto d = parse_direction(text);
    if (!d) throw CLI::ValidationError("--order", "expected asc or desc, got '" + text + "'");
    return *d;
}

int do_run(const std::string& input, const SortKeySpec& spec, const EngineFlags& flags,
           const std::string& trace_path, const std::string& stats_path, std::ostream& out,
           std::ostream& err) {
    auto dataset = load_records(input);
    if (validate_key(dataset, spec) == KeyCheck::Ignored) {
        err << "trigger ignored: no attribute named '" << spec.attribute << "'\n";
        return 1;
    }
    const std::set<std::string> attributes(dataset.header.begin(), dataset.header.end());
    Simulation sim(extract_keys(dataset, spec.attribute), flags.config(spec.direction), spec.attribute,
                   attributes);
    auto result = sim.run_until_quiescent();
    if (result.trigger_ignored) {
        err << "trigger ignored: no attribute named '" << spec.attribute << "'\n";
        return 1;
    }
    if (!trace_path.empty()) write_file(trace_path, trace_to_string(result.trace));
    if (!stats_path.empty()) write_file(stats_path, format_stats(result.stats) + '\n');

    Dataset sorted{dataset.header, {}};
    for (const auto& [id, key] : result.order) sorted.records.push_back(dataset.records[id.value - 1]);
    out << write_records(sorted);
    return 0;
}

int do_report(const std::string& input, const std::string& key, const std::string& order,
              const EngineFlags& flags, const std::string& out_path, std::ostream& out) {
    auto dataset = load_records(input);
    auto derived = dataset;
    add_derived_columns(derived, infer_layout(derived));

    // Numeric keys rank best-first unless told otherwise.
    bool numeric = true;
    for (const auto& k : extract_keys(derived, key)) {
        if (k.kind() == KeyKind::Text) numeric = false;
    }
    SortKeySpec spec{key, direction_or(order, numeric ? SortDirection::Descending : SortDirection::Ascending)};
    auto report = generate_report(std::move(dataset), spec, flags.config(spec.direction));
    if (out_path.empty()) {
        out << report.text;
    } else {
        write_file(out_path, report.text);
    }
    return 0;
}

int do_bench(const BenchConfig& cfg, const std::string& jsonl_path, std::ostream& out) {
    const auto rows = run_benchmark(cfg);
    out << format_table(rows);
    if (!jsonl_path.empty()) write_file(jsonl_path, format_jsonl(rows));
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-sorting list engine"};
    app.name("selfsort");
    app.require_subcommand(1);

    std::string input, key, order, trace_path, stats_path, out_path, jsonl_path;
    EngineFlags flags;

    auto* run = app.add_subcommand("run", "sort the records of a CSV file by one attribute");
    run->add_option("--input", input, "CSV file")->required();
    run->add_option("--key", key, "sort attribute")->required();
    run->add_option("--order", order, "asc (default) or desc");
    run->add_option("--trace", trace_path, "write the event trace here");
    run->add_option("--stats", stats_path, "write run statistics here");
    add_engine_flags(run, flags);

    auto* report = app.add_subcommand("report", "ranked report with T. SUB, AVE and POS");
    report->add_option("--input", input, "CSV file")->required();
    report->add_option("--key", key, "sort attribute")->required();
    report->add_option("--order", order, "asc or desc (default desc for numeric keys)");
    report->add_option("--out", out_path, "write the report here instead of stdout");
    add_engine_flags(report, flags);

    BenchConfig bench_cfg;
    std::vector<std::string> dist_names{"random", "sorted", "reversed"};
    auto* bench = app.add_subcommand("bench", "measure swaps and messages over input families");
    bench->add_option("--sizes", bench_cfg.sizes, "comma-separated list sizes")->required()->delimiter(',');
    bench->add_option("--dist", dist_names, "random,sorted,reversed")
        ->delimiter(',')
        ->check(CLI::IsMember({"random", "sorted", "reversed"}));
    bench->add_option("--trials", bench_cfg.trials, "runs per cell");
    bench->add_option("--seed", bench_cfg.seed, "base seed");
    bench->add_option("--threads", bench_cfg.threads, "worker threads (0: all cores)");
    bench->add_option("--jsonl", jsonl_path, "also write one JSON object per cell here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (run->parsed()) {
            SortKeySpec spec{key, direction_or(order, SortDirection::Ascending)};
            return do_run(input, spec, flags, trace_path, stats_path, out, err);
        }
        if (report->parsed()) return do_report(input, key, order, flags, out_path, out);
        bench_cfg.dists.clear();
        for (const auto& d : dist_names) bench_cfg.dists.push_back(*parse_distribution(d));
        return do_bench(bench_cfg, jsonl_path, out);
    } catch (const Refusal& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const CLI::Error& e) {
        err << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace selfsort

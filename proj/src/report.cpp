#include "selfsort/report.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "selfsort/errors.hpp"

namespace selfsort {

namespace {

void append_cell(std::string& line, const std::string& text, std::size_t width, bool right) {
    if (!line.empty()) line += "  ";
    const auto pad = width > text.size() ? width - text.size() : 0;
    if (right) line.append(pad, ' ');
    line += text;
    if (!right) line.append(pad, ' ');
}

}  // namespace

ReportLayout infer_layout(const Dataset& dataset) {
    if (dataset.header.empty()) throw FormatError("dataset has no header", 1);
    ReportLayout layout;
    layout.id_column = dataset.header.front();
    for (std::size_t i = 1; i < dataset.header.size(); ++i) {
        const auto& h = dataset.header[i];
        if (h == "NAME") {
            layout.name_column = h;
        } else if (h != kAverageColumn && h != kSubjectCountColumn) {
            layout.subjects.push_back(h);
        }
    }
    return layout;
}

void add_derived_columns(Dataset& dataset, const ReportLayout& layout) {
    const bool add_count = !dataset.has_attribute(kSubjectCountColumn);
    const bool add_average = !dataset.has_attribute(kAverageColumn) && !layout.subjects.empty();
    if (add_count) dataset.header.emplace_back(kSubjectCountColumn);
    if (add_average) dataset.header.emplace_back(kAverageColumn);
    for (auto& rec : dataset.records) {
        if (add_count) {
            rec.attributes.emplace_back(kSubjectCountColumn,
                                        std::to_string(count_present(rec, layout.subjects)));
        }
        if (add_average) {
            const auto ave = compute_average(rec, layout.subjects);
            rec.attributes.emplace_back(kAverageColumn, ave ? ave->str() : "-");
        }
    }
}

std::vector<KeyValue> extract_keys(const Dataset& dataset, const std::string& attribute) {
    std::vector<KeyValue> keys;
    keys.reserve(dataset.records.size());
    for (const auto& rec : dataset.records) {
        const auto* raw = rec.find(attribute);
        keys.push_back(raw ? parse_key(*raw) : KeyValue::missing());
    }
    return keys;
}

std::vector<ReportRow> build_report(const Dataset& dataset, const ReportLayout& layout,
                                    const SortKeySpec& spec, const std::vector<AgentId>& engine_order) {
    if (dataset.records.size() < 2) {
        throw Refusal("Sorting list must contain at least two objects");
    }
    if (engine_order.size() != dataset.records.size()) {
        throw std::invalid_argument("engine order does not cover the dataset");
    }
    const auto all_keys = extract_keys(dataset, spec.attribute);

    std::vector<std::size_t> order;  // record indices
    order.reserve(engine_order.size());
    for (auto id : engine_order) {
        if (id.value == 0 || id.value > dataset.records.size()) {
            throw std::invalid_argument("engine order names an unknown record");
        }
        order.push_back(id.value - 1);
    }
    std::vector<KeyValue> sorted_keys;
    for (auto i : order) sorted_keys.push_back(all_keys[i]);
    const auto ranks = competition_rank(sorted_keys);

    // Within each tie class, fall back to input order.
    for (std::size_t start = 0; start < order.size();) {
        auto end = start + 1;
        while (end < order.size() && ranks[end] == ranks[start]) ++end;
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                  order.begin() + static_cast<std::ptrdiff_t>(end));
        start = end;
    }

    std::vector<ReportRow> rows;
    rows.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& rec = dataset.records[order[i]];
        ReportRow row;
        row.ordinal_no = i + 1;
        row.record_id = rec.id;
        if (layout.name_column) {
            if (const auto* name = rec.find(*layout.name_column)) row.name = *name;
        }
        for (const auto& subject : layout.subjects) {
            const auto* mark = rec.find(subject);
            row.marks.push_back(mark ? *mark : "-");
        }
        row.total_subjects = count_present(rec, layout.subjects);
        if (!layout.subjects.empty()) row.average = compute_average(rec, layout.subjects);
        row.rank = ranks[i];
        row.position_label = ordinal_label(ranks[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_report(const std::vector<ReportRow>& rows, const ReportLayout& layout) {
    std::vector<std::string> headers{"NO", layout.id_column};
    if (layout.name_column) headers.push_back(*layout.name_column);
    const auto first_subject = headers.size();
    for (const auto& s : layout.subjects) headers.push_back(s);
    headers.insert(headers.end(), {kSubjectCountColumn, kAverageColumn, "POS"});

    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        std::vector<std::string> line{std::to_string(row.ordinal_no), row.record_id};
        if (layout.name_column) line.push_back(row.name);
        line.insert(line.end(), row.marks.begin(), row.marks.end());
        line.push_back(std::to_string(row.total_subjects));
        line.push_back(row.average ? row.average->str() : "-");
        line.push_back(row.position_label);
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        width[c] = headers[c].size();
        for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
    }
    auto right_aligned = [&](std::size_t c) { return c == 0 || (c >= first_subject && c + 1 < headers.size()); };

    std::string out;
    std::string line;
    for (std::size_t c = 0; c < headers.size(); ++c) append_cell(line, headers[c], width[c], right_aligned(c));
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    for (const auto& row : cells) {
        line.clear();
        for (std::size_t c = 0; c < row.size(); ++c) append_cell(line, row[c], width[c], right_aligned(c));
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + '\n';
    }
    return out;
}

ReportRun generate_report(Dataset dataset, const SortKeySpec& spec, const RunConfig& config) {
    if (dataset.records.size() < 2) {
        throw Refusal("Sorting list must contain at least two objects");
    }
    const auto layout = infer_layout(dataset);
    add_derived_columns(dataset, layout);

    const std::set<std::string> attributes(dataset.header.begin(), dataset.header.end());
    Simulation sim(extract_keys(dataset, spec.attribute),
                   RunConfig{config.seed, config.max_steps, config.mode, spec.direction,
                             config.transport, config.record_trace},
                   spec.attribute, attributes);
    auto engine = sim.run_until_quiescent();
    if (engine.trigger_ignored) {
        throw Refusal("trigger ignored: no attribute named '" + spec.attribute + "'");
    }
    std::vector<AgentId> order;
    for (const auto& [id, key] : engine.order) order.push_back(id);

    ReportRun out;
    out.rows = build_report(dataset, layout, spec, order);
    out.text = render_report(out.rows, layout);
    out.engine = std::move(engine);
    return out;
}

}  // namespace selfsort

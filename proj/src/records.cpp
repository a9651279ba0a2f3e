#include "selfsort/records.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "selfsort/errors.hpp"

namespace selfsort {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_row(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                              : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

// floor(a / b) for b > 0
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    auto q = a / b;
    if ((a % b != 0) && (a < 0)) --q;
    return q;
}

}  // namespace

const std::string* Record::find(std::string_view name) const {
    for (const auto& [k, v] : attributes) {
        if (k == name) return &v;
    }
    return nullptr;
}

bool Dataset::has_attribute(std::string_view name) const {
    for (const auto& h : header) {
        if (h == name) return true;
    }
    return false;
}

Dataset parse_records(std::string_view csv) {
    Dataset ds;
    std::size_t row = 0;
    std::set<std::string> ids;
    std::size_t start = 0;
    while (start < csv.size()) {
        auto lf = csv.find('\n', start);
        if (lf == std::string_view::npos) lf = csv.size();
        auto line = csv.substr(start, lf - start);
        start = lf + 1;
        ++row;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (row == 1) {
            ds.header = split_row(line);
            std::set<std::string> seen;
            for (const auto& h : ds.header) {
                if (!seen.insert(h).second) throw FormatError("duplicate header name '" + h + "'", 1);
            }
            continue;
        }
        if (line.empty()) continue;
        auto cells = split_row(line);
        if (cells.size() != ds.header.size()) {
            throw FormatError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                  " fields, header has " + std::to_string(ds.header.size()),
                              row);
        }
        Record rec;
        rec.id = cells.front();
        if (!ids.insert(rec.id).second) {
            throw FormatError("row " + std::to_string(row) + " repeats id '" + rec.id + "'", row);
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            rec.attributes.emplace_back(ds.header[i], std::move(cells[i]));
        }
        ds.records.push_back(std::move(rec));
    }
    if (ds.header.empty() || (ds.header.size() == 1 && ds.header.front().empty())) {
        throw FormatError("missing header row", 1);
    }
    return ds;
}

Dataset load_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_records(buf.str());
}

std::string write_records(const Dataset& dataset) {
    std::string out;
    for (std::size_t i = 0; i < dataset.header.size(); ++i) {
        if (i) out += ',';
        out += dataset.header[i];
    }
    out += '\n';
    for (const auto& rec : dataset.records) {
        for (std::size_t i = 0; i < rec.attributes.size(); ++i) {
            if (i) out += ',';
            out += rec.attributes[i].second;
        }
        out += '\n';
    }
    return out;
}

KeyCheck validate_key(const Dataset& dataset, const SortKeySpec& spec) {
    if (spec.attribute.empty()) return KeyCheck::Ignored;
    return dataset.has_attribute(spec.attribute) ? KeyCheck::Accepted : KeyCheck::Ignored;
}

KeyValue parse_key(std::string_view raw) {
    const auto s = trim(raw);
    if (s.empty() || s == "-") return KeyValue::missing();
    if (auto k = KeyValue::from_numeric_literal(s)) return *k;
    return KeyValue::text(std::string(s));
}

std::string Centi::str() const {
    const bool neg = hundredths < 0;
    const auto mag = neg ? -hundredths : hundredths;
    std::string frac = std::to_string(mag % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return (neg ? "-" : "") + std::to_string(mag / 100) + "." + frac;
}

std::optional<Centi> compute_average(const Record& record, std::span<const std::string> subjects) {
    if (subjects.empty()) throw std::invalid_argument("compute_average needs at least one subject");
    constexpr std::int64_t kMicro = 1'000'000;
    std::int64_t sum = 0;  // micro-units
    std::int64_t count = 0;
    for (const auto& subject : subjects) {
        const auto* raw = record.find(subject);
        if (!raw) continue;
        const auto k = parse_key(*raw);
        if (k.kind() != KeyKind::Numeric) continue;
        sum += std::llround(k.number() * kMicro);
        ++count;
    }
    if (count == 0) return std::nullopt;
    // Half-up: floor(mean_in_hundredths + 1/2).
    const std::int64_t d = count * (kMicro / 100);
    return Centi{floor_div(2 * sum + d, 2 * d)};
}

std::size_t count_present(const Record& record, std::span<const std::string> subjects) {
    std::size_t n = 0;
    for (const auto& subject : subjects) {
        const auto* raw = record.find(subject);
        if (raw && !parse_key(*raw).is_missing()) ++n;
    }
    return n;
}

std::vector<std::size_t> competition_rank(std::span<const KeyValue> sorted_keys) {
    std::vector<std::size_t> ranks(sorted_keys.size());
    for (std::size_t i = 0; i < sorted_keys.size(); ++i) {
        ranks[i] = (i > 0 && same_class(sorted_keys[i], sorted_keys[i - 1])) ? ranks[i - 1] : i + 1;
    }
    return ranks;
}

std::string ordinal_label(std::size_t rank) {
    if (rank == 0) throw std::invalid_argument("ranks start at 1");
    const auto last_two = rank % 100;
    const char* suffix = "TH";
    if (last_two < 11 || last_two > 13) {
        switch (rank % 10) {
            case 1: suffix = "ST"; break;
            case 2: suffix = "ND"; break;
            case 3: suffix = "RD"; break;
            default: break;
        }
    }
    return std::to_string(rank) + suffix;
}

}  // namespace selfsort

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfsort/key_value.hpp"

namespace selfsort {

/// One data row. Every value stays a string; a mark may be "-".
struct Record {
    std::string id;
    std::vector<std::pair<std::string, std::string>> attributes;  // header order

    const std::string* find(std::string_view name) const;
};

struct Dataset {
    std::vector<std::string> header;
    std::vector<Record> records;

    bool has_attribute(std::string_view name) const;
};

/// Comma-separated, first row is the header, first column is the record id.
/// Throws FormatError on duplicate header names, duplicate ids or ragged rows.
Dataset parse_records(std::string_view csv);
Dataset load_records(const std::filesystem::path& path);

/// Inverse of parse_records: header plus rows, LF line endings.
std::string write_records(const Dataset& dataset);

struct SortKeySpec {
    std::string attribute;
    SortDirection direction = SortDirection::Ascending;
};

enum class KeyCheck { Accepted, Ignored };

/// Exact, case-sensitive match against the header.
KeyCheck validate_key(const Dataset& dataset, const SortKeySpec& spec);

/// "-" or blank -> Missing; finite decimal -> Numeric; anything else -> Text.
KeyValue parse_key(std::string_view raw);

/// Fixed-point value with two decimals.
struct Centi {
    std::int64_t hundredths = 0;

    std::string str() const;
    friend auto operator<=>(const Centi&, const Centi&) = default;
};

/// Mean of the numeric marks among `subjects`, rounded half-up to 2 dp.
/// Missing and non-numeric marks count in neither sum nor divisor; nullopt
/// when no subject has a numeric mark.
std::optional<Centi> compute_average(const Record& record, std::span<const std::string> subjects);

/// Marks that are present (not "-" or blank).
std::size_t count_present(const Record& record, std::span<const std::string> subjects);

/// Standard competition ranks ("1224") for keys already in sorted order.
std::vector<std::size_t> competition_rank(std::span<const KeyValue> sorted_keys);

/// 1 -> "1ST", 2 -> "2ND", 11 -> "11TH", 21 -> "21ST".
std::string ordinal_label(std::size_t rank);

}  // namespace selfsort

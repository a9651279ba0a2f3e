#pragma once

#include <optional>
#include <string>
#include <vector>

#include "selfsort/message.hpp"
#include "selfsort/records.hpp"
#include "selfsort/simulation.hpp"

namespace selfsort {

inline constexpr const char* kAverageColumn = "AVE";
inline constexpr const char* kSubjectCountColumn = "T. SUB";

struct ReportLayout {
    std::string id_column;
    std::optional<std::string> name_column;
    std::vector<std::string> subjects;
};

/// First column is the id, "NAME" (if present) the name, every other
/// non-derived column a subject.
ReportLayout infer_layout(const Dataset& dataset);

/// Appends T. SUB and AVE to every record unless the header already has them.
void add_derived_columns(Dataset& dataset, const ReportLayout& layout);

struct ReportRow {
    std::size_t ordinal_no = 0;
    std::string record_id;
    std::string name;
    std::vector<std::string> marks;
    std::size_t total_subjects = 0;
    std::optional<Centi> average;
    std::size_t rank = 0;
    std::string position_label;
};

/// Rows from an engine order (agent i is dataset record i-1). Ranks come
/// from the sort key; records tied on it are listed in input order.
std::vector<ReportRow> build_report(const Dataset& dataset, const ReportLayout& layout,
                                    const SortKeySpec& spec, const std::vector<AgentId>& engine_order);

std::string render_report(const std::vector<ReportRow>& rows, const ReportLayout& layout);

struct ReportRun {
    std::vector<ReportRow> rows;
    std::string text;
    RunResult engine;
};

/// Adds derived columns, checks the key, runs the engine and renders.
/// Throws Refusal for fewer than two records or an unknown key attribute.
ReportRun generate_report(Dataset dataset, const SortKeySpec& spec, const RunConfig& config);

/// The key column parsed for every record, in input order.
std::vector<KeyValue> extract_keys(const Dataset& dataset, const std::string& attribute);

}  // namespace selfsort

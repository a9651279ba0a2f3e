#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace selfsort {

enum class TraceKind {
    Trigger,
    KeyExchange,
    Evaluate,
    Propose,
    Grant,
    Deny,
    Swap,
    NeighborNotify,
    Suspend,
    Deadlock,
    Quiescent,
};

std::string_view to_string(TraceKind kind);
std::optional<TraceKind> parse_trace_kind(std::string_view text);

struct TraceEvent {
    std::uint64_t step = 0;
    TraceKind kind = TraceKind::Trigger;
    std::vector<std::pair<std::string, std::string>> payload;

    /// Value of a payload field; empty when absent.
    std::string_view get(std::string_view name) const;
    std::uint64_t get_number(std::string_view name) const;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

/// One event per line: step TAB kind TAB key=value TAB key=value ... LF
std::string format_trace_line(const TraceEvent& event);
TraceEvent parse_trace_line(std::string_view line);

void write_trace(std::ostream& out, const Trace& trace);
std::string trace_to_string(const Trace& trace);

}  // namespace selfsort

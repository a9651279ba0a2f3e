#include "selfsort/trace.hpp"

#include <array>
#include <charconv>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace selfsort {

namespace {

constexpr std::array<std::pair<TraceKind, std::string_view>, 11> kKinds{{
    {TraceKind::Trigger, "Trigger"},
    {TraceKind::KeyExchange, "KeyExchange"},
    {TraceKind::Evaluate, "Evaluate"},
    {TraceKind::Propose, "Propose"},
    {TraceKind::Grant, "Grant"},
    {TraceKind::Deny, "Deny"},
    {TraceKind::Swap, "Swap"},
    {TraceKind::NeighborNotify, "NeighborNotify"},
    {TraceKind::Suspend, "Suspend"},
    {TraceKind::Deadlock, "Deadlock"},
    {TraceKind::Quiescent, "Quiescent"},
}};

}  // namespace

std::string_view to_string(TraceKind kind) {
    for (const auto& [k, name] : kKinds) {
        if (k == kind) return name;
    }
    return "?";
}

std::optional<TraceKind> parse_trace_kind(std::string_view text) {
    for (const auto& [k, name] : kKinds) {
        if (name == text) return k;
    }
    return std::nullopt;
}

std::string_view TraceEvent::get(std::string_view name) const {
    for (const auto& [k, v] : payload) {
        if (k == name) return v;
    }
    return {};
}

std::uint64_t TraceEvent::get_number(std::string_view name) const {
    const auto v = get(name);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw std::invalid_argument("trace field " + std::string(name) + " is not a number");
    }
    return out;
}

std::string format_trace_line(const TraceEvent& event) {
    std::string line = std::to_string(event.step);
    line += '\t';
    line += to_string(event.kind);
    for (const auto& [k, v] : event.payload) {
        line += '\t';
        line += k;
        line += '=';
        line += v;
    }
    return line;
}

TraceEvent parse_trace_line(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        cols.push_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    if (cols.size() < 2) throw std::invalid_argument("trace line needs step and kind");
    TraceEvent e;
    auto [p, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), e.step);
    if (ec != std::errc{}) throw std::invalid_argument("bad trace step");
    const auto kind = parse_trace_kind(cols[1]);
    if (!kind) throw std::invalid_argument("unknown trace kind " + std::string(cols[1]));
    e.kind = *kind;
    for (std::size_t i = 2; i < cols.size(); ++i) {
        const auto eq = cols[i].find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument("payload needs key=value");
        e.payload.emplace_back(std::string(cols[i].substr(0, eq)),
                               std::string(cols[i].substr(eq + 1)));
    }
    return e;
}

void write_trace(std::ostream& out, const Trace& trace) {
    for (const auto& e : trace) out << format_trace_line(e) << '\n';
}

std::string trace_to_string(const Trace& trace) {
    std::ostringstream os;
    write_trace(os, trace);
    return os.str();
}

}  // namespace selfsort

#include "selfsort/key_value.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

namespace selfsort {

namespace {

const std::string kDash = "-";

char lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

int compare_text(const std::string& a, const std::string& b) {
    const auto n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ca = static_cast<unsigned char>(lower(a[i]));
        const auto cb = static_cast<unsigned char>(lower(b[i]));
        if (ca != cb) return ca < cb ? -1 : 1;
    }
    if (a.size() == b.size()) return 0;
    return a.size() < b.size() ? -1 : 1;
}

int kind_rank(KeyKind k) {
    switch (k) {
        case KeyKind::Numeric: return 0;
        case KeyKind::Text: return 1;
        case KeyKind::Missing: return 2;
    }
    return 2;
}

}  // namespace

KeyValue KeyValue::numeric(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return numeric(value, std::string(buf.data(), end));
}

KeyValue KeyValue::numeric(double value, std::string literal) {
    KeyValue k;
    k.kind_ = KeyKind::Numeric;
    k.number_ = value;
    k.text_ = std::move(literal);
    return k;
}

KeyValue KeyValue::text(std::string value) {
    KeyValue k;
    k.kind_ = KeyKind::Text;
    k.text_ = std::move(value);
    return k;
}

std::optional<KeyValue> KeyValue::from_numeric_literal(std::string_view literal) {
    if (literal.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = literal.data();
    const char* last = literal.data() + literal.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return numeric(value, std::string(literal));
}

const std::string& KeyValue::str() const noexcept {
    return kind_ == KeyKind::Missing ? kDash : text_;
}

bool operator==(const KeyValue& a, const KeyValue& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
        case KeyKind::Numeric: return a.number_ == b.number_ && a.text_ == b.text_;
        case KeyKind::Text: return a.text_ == b.text_;
        case KeyKind::Missing: return true;
    }
    return false;
}

int compare_keys(const KeyValue& a, const KeyValue& b, SortDirection direction) {
    // Missing sorts last regardless of direction.
    if (a.is_missing() || b.is_missing()) {
        if (a.is_missing() && b.is_missing()) return 0;
        return a.is_missing() ? 1 : -1;
    }
    int c = 0;
    if (a.kind() != b.kind()) {
        c = kind_rank(a.kind()) < kind_rank(b.kind()) ? -1 : 1;
    } else if (a.kind() == KeyKind::Numeric) {
        c = (a.number() < b.number()) ? -1 : (a.number() > b.number() ? 1 : 0);
    } else {
        c = compare_text(a.str(), b.str());
    }
    return direction == SortDirection::Ascending ? c : -c;
}

std::string_view to_string(SortDirection direction) {
    return direction == SortDirection::Ascending ? "asc" : "desc";
}

std::optional<SortDirection> parse_direction(std::string_view text) {
    if (text == "asc" || text == "ascending") return SortDirection::Ascending;
    if (text == "desc" || text == "descending") return SortDirection::Descending;
    return std::nullopt;
}

}  // namespace selfsort

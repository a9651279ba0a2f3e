#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace selfsort {

enum class SortDirection { Ascending, Descending };

enum class KeyKind { Numeric, Text, Missing };

/// A comparable sort-key value. Numeric keys keep the literal they were
/// parsed from so that "59.60" survives a print/parse round trip.
class KeyValue {
public:
    KeyValue() = default;  // Missing

    static KeyValue numeric(double value);
    static KeyValue numeric(double value, std::string literal);
    static KeyValue text(std::string value);
    static KeyValue missing() { return KeyValue{}; }

    /// Parses a numeric literal; nullopt unless the whole string is a finite
    /// decimal number.
    static std::optional<KeyValue> from_numeric_literal(std::string_view literal);

    KeyKind kind() const noexcept { return kind_; }
    bool is_missing() const noexcept { return kind_ == KeyKind::Missing; }
    double number() const noexcept { return number_; }

    /// Numeric: the source literal. Text: the text. Missing: "-".
    const std::string& str() const noexcept;

    /// Structural equality (same kind, same payload, same literal).
    friend bool operator==(const KeyValue& a, const KeyValue& b);

private:
    KeyKind kind_ = KeyKind::Missing;
    double number_ = 0.0;
    std::string text_;
};

/// Three-way comparison in sort order: negative when `a` belongs before `b`.
/// Numeric < Text ascending (reversed for descending); Missing is always last.
/// Text compares case-insensitively.
int compare_keys(const KeyValue& a, const KeyValue& b, SortDirection direction);

/// True when `a` may precede `b` (ordered or equal).
inline bool in_order(const KeyValue& a, const KeyValue& b, SortDirection direction) {
    return compare_keys(a, b, direction) <= 0;
}

inline bool same_class(const KeyValue& a, const KeyValue& b) {
    return compare_keys(a, b, SortDirection::Ascending) == 0;
}

std::string_view to_string(SortDirection direction);
std::optional<SortDirection> parse_direction(std::string_view text);

}  // namespace selfsort

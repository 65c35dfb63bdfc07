#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace contagionx {

/// A calendar day, stored as days since 1970-01-01. Snapshot dating and
/// maturity windows only need day arithmetic and ISO-8601 text form.
class Day {
public:
    constexpr Day() = default;

    static constexpr Day from_days(std::int32_t days) {
        Day d;
        d.days_ = days;
        return d;
    }

    /// Parses "YYYY-MM-DD"; rejects impossible dates.
    static Day parse_iso(std::string_view text);

    std::string str() const;

    constexpr std::int32_t raw() const { return days_; }

    constexpr Day operator+(int n) const { return from_days(days_ + n); }
    constexpr Day operator-(int n) const { return from_days(days_ - n); }
    constexpr int operator-(Day o) const { return days_ - o.days_; }
    constexpr Day& operator++() {
        ++days_;
        return *this;
    }
    constexpr auto operator<=>(const Day&) const = default;

private:
    std::int32_t days_ = 0;
};

} // namespace contagionx

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace contagionx {

/// Fixed-precision monetary amount with two fractional digits, stored as an
/// integer number of cents. All ledger arithmetic stays in cents so that
/// results are identical across runs and platforms; conversion to floating
/// point happens only inside ratio computations (CAR).
class Money {
public:
    constexpr Money() = default;

    static constexpr Money from_cents(std::int64_t cents) {
        Money m;
        m.cents_ = cents;
        return m;
    }

    /// Rounds to the nearest cent, ties away from zero.
    static Money from_value(double value);

    /// Parses "123", "123.4" or "123.45" (dot separator, optional leading
    /// minus). More than two fractional digits is a ValidationError.
    static Money parse(std::string_view text);

    constexpr std::int64_t cents() const { return cents_; }
    double value() const { return static_cast<double>(cents_) / 100.0; }

    /// Nearest-cent product with a dimensionless factor.
    Money scaled(double factor) const;

    std::string str() const;

    constexpr bool is_zero() const { return cents_ == 0; }
    constexpr bool is_negative() const { return cents_ < 0; }

    constexpr Money operator+(Money o) const { return from_cents(cents_ + o.cents_); }
    constexpr Money operator-(Money o) const { return from_cents(cents_ - o.cents_); }
    constexpr Money operator-() const { return from_cents(-cents_); }
    constexpr Money& operator+=(Money o) {
        cents_ += o.cents_;
        return *this;
    }
    constexpr Money& operator-=(Money o) {
        cents_ -= o.cents_;
        return *this;
    }
    constexpr auto operator<=>(const Money&) const = default;

private:
    std::int64_t cents_ = 0;
};

} // namespace contagionx

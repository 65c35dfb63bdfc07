#include "contagionx/money.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "contagionx/errors.hpp"

namespace contagionx {

Money Money::from_value(double value) {
    return from_cents(std::llround(value * 100.0));
}

Money Money::scaled(double factor) const {
    return from_cents(std::llround(static_cast<double>(cents_) * factor));
}

Money Money::parse(std::string_view text) {
    if (text.empty())
        throw ValidationError("empty amount");
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '-') {
        negative = true;
        ++pos;
    }
    if (pos == text.size())
        throw ValidationError("malformed amount '" + std::string(text) + "'");

    std::int64_t whole = 0;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        whole = whole * 10 + (text[pos] - '0');
        ++pos;
        ++digits;
    }
    if (digits == 0)
        throw ValidationError("malformed amount '" + std::string(text) + "'");

    std::int64_t frac = 0;
    if (pos < text.size()) {
        if (text[pos] != '.')
            throw ValidationError("malformed amount '" + std::string(text) + "'");
        ++pos;
        std::size_t frac_digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            frac = frac * 10 + (text[pos] - '0');
            ++pos;
            ++frac_digits;
        }
        if (frac_digits == 0 || frac_digits > 2)
            throw ValidationError("amount '" + std::string(text) +
                                  "' must have one or two fractional digits");
        if (frac_digits == 1)
            frac *= 10;
    }
    if (pos != text.size())
        throw ValidationError("malformed amount '" + std::string(text) + "'");

    std::int64_t cents = whole * 100 + frac;
    return from_cents(negative ? -cents : cents);
}

std::string Money::str() const {
    std::int64_t c = cents_;
    const char* sign = "";
    if (c < 0) {
        sign = "-";
        c = -c;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", sign, static_cast<long long>(c / 100),
                  static_cast<long long>(c % 100));
    return buf;
}

} // namespace contagionx

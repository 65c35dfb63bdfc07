#include "contagionx/calendar.hpp"

#include <chrono>
#include <cstdio>

#include "contagionx/errors.hpp"

namespace contagionx {

namespace {

bool parse_fixed_uint(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (i >= text.size() || text[i] < '0' || text[i] > '9')
            return false;
        value = value * 10 + (text[i] - '0');
    }
    out = value;
    return true;
}

} // namespace

Day Day::parse_iso(std::string_view text) {
    int y = 0, m = 0, d = 0;
    const bool shape_ok = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
                          parse_fixed_uint(text, 0, 4, y) && parse_fixed_uint(text, 5, 2, m) &&
                          parse_fixed_uint(text, 8, 2, d);
    if (!shape_ok)
        throw ValidationError("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok())
        throw ValidationError("impossible date '" + std::string(text) + "'");
    const std::chrono::sys_days days{ymd};
    return from_days(static_cast<std::int32_t>(days.time_since_epoch().count()));
}

std::string Day::str() const {
    const std::chrono::sys_days days{std::chrono::days{days_}};
    const std::chrono::year_month_day ymd{days};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

} // namespace contagionx

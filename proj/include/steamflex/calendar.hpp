#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace steamflex {

enum class Weekday : int {
    Monday = 0,
    Tuesday = 1,
    Wednesday = 2,
    Thursday = 3,
    Friday = 4,
    Saturday = 5,
    Sunday = 6
};

namespace detail {

// Days from civil date, Howard Hinnant's algorithm (public domain).
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

inline bool days_in_month_ok(int y, int m, int d) {
    static const int dim[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12 || d < 1) return false;
    int n = dim[m - 1];
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) n = 29;
    return d <= n;
}

}  // namespace detail

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (UTC, no offsets) to unix seconds.
inline std::int64_t parse_iso8601_utc(const std::string& s) {
    int y, mo, d, h, mi, se;
    char tsep, zsep;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c",
                    &y, &mo, &d, &tsep, &h, &mi, &se, &zsep) != 8 ||
        (tsep != 'T' && tsep != ' ') || zsep != 'Z')
        throw std::invalid_argument("timestamp '" + s +
                                    "' is not ISO-8601 UTC (expected YYYY-MM-DDTHH:MM:SSZ)");
    if (!detail::days_in_month_ok(y, mo, d))
        throw std::invalid_argument("timestamp '" + s + "' has an invalid calendar date");
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 60)
        throw std::invalid_argument("timestamp '" + s + "' has an invalid time of day");
    return detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

inline std::string format_iso8601_utc(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    int y, m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(sod / 3600), static_cast<int>((sod % 3600) / 60),
                  static_cast<int>(sod % 60));
    return buf;
}

/// Weekday of a unix timestamp. 1970-01-01 was a Thursday.
inline Weekday weekday_of(std::int64_t unix_s) {
    std::int64_t days = unix_s / 86400;
    if (unix_s % 86400 < 0) days -= 1;
    return static_cast<Weekday>(((days % 7) + 7 + 3) % 7);
}

inline bool is_weekend(Weekday w) { return w == Weekday::Saturday || w == Weekday::Sunday; }

}  // namespace steamflex

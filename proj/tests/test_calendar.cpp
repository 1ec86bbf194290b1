#include <catch2/catch_amalgamated.hpp>

#include "steamflex/calendar.hpp"

using namespace steamflex;

TEST_CASE("iso8601 parse and format round trip") {
    const char* samples[] = {"1970-01-01T00:00:00Z", "2024-01-01T00:00:00Z",
                             "2024-02-29T12:30:45Z", "2024-12-31T23:00:00Z",
                             "1969-07-20T20:17:40Z"};
    for (const char* s : samples) {
        const auto t = parse_iso8601_utc(s);
        CHECK(format_iso8601_utc(t) == s);
    }
    CHECK(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601_utc("1970-01-02T00:00:00Z") == 86400);
    CHECK(parse_iso8601_utc("2024-01-01T00:00:00Z") == 1704067200);
}

TEST_CASE("invalid timestamps are rejected with a reason") {
    CHECK_THROWS_AS(parse_iso8601_utc("2024-13-01T00:00:00Z"), std::invalid_argument);
    CHECK_THROWS_AS(parse_iso8601_utc("2023-02-29T00:00:00Z"), std::invalid_argument);
    CHECK_THROWS_AS(parse_iso8601_utc("2024-01-01T25:00:00Z"), std::invalid_argument);
    CHECK_THROWS_AS(parse_iso8601_utc("2024-01-01 00:00:00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_iso8601_utc("01/02/2024"), std::invalid_argument);
}

TEST_CASE("weekday") {
    CHECK(weekday_of(parse_iso8601_utc("2024-01-01T00:00:00Z")) == Weekday::Monday);
    CHECK(weekday_of(parse_iso8601_utc("2024-01-06T10:00:00Z")) == Weekday::Saturday);
    CHECK(weekday_of(parse_iso8601_utc("2024-01-07T23:59:59Z")) == Weekday::Sunday);
    CHECK(weekday_of(parse_iso8601_utc("1970-01-01T00:00:00Z")) == Weekday::Thursday);
    CHECK(is_weekend(Weekday::Saturday));
    CHECK(is_weekend(Weekday::Sunday));
    CHECK_FALSE(is_weekend(Weekday::Wednesday));
}

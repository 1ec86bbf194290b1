#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "steamflex/calendar.hpp"
#include "steamflex/timeseries.hpp"

namespace steamflex {

/// Canonical market-data schema: a header line naming the columns, then one
/// row per step. Timestamps are ISO-8601 UTC, values plain decimals, UTF-8,
/// comma separated. Extra columns are permitted and ignored.
struct ColumnSpec {
    std::string timestamp = "timestamp";
    std::string value = "value";
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Reads a canonical CSV into a gap-free TimeSeries. Fails loudly: malformed
/// rows, duplicate or non-monotone timestamps, and gaps are all errors that
/// name the offending line or interval. No silent interpolation.
inline TimeSeries load_timeseries(const std::string& path, const std::string& unit_tag,
                                  const ColumnSpec& columns = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": file is empty");
    const auto header = detail::split_csv_line(line);
    std::ptrdiff_t ts_col = -1, val_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = detail::trim(header[i]);
        if (name == columns.timestamp) ts_col = static_cast<std::ptrdiff_t>(i);
        if (name == columns.value) val_col = static_cast<std::ptrdiff_t>(i);
    }
    if (ts_col < 0 || val_col < 0)
        throw std::runtime_error(path + ": header must contain columns '" + columns.timestamp +
                                 "' and '" + columns.value + "'");

    std::vector<std::int64_t> stamps;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() <= static_cast<std::size_t>(std::max(ts_col, val_col)))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": row has too few columns");
        std::int64_t t;
        try {
            t = parse_iso8601_utc(detail::trim(fields[static_cast<std::size_t>(ts_col)]));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const std::string raw = detail::trim(fields[static_cast<std::size_t>(val_col)]);
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (raw.empty() || end != raw.c_str() + raw.size() || !std::isfinite(v))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": value '" + raw + "' is not a finite number");
        stamps.push_back(t);
        values.push_back(v);
    }
    if (stamps.size() < 2)
        throw std::runtime_error(path + ": need at least two rows to establish the step length");

    const std::int64_t dt = stamps[1] - stamps[0];
    if (dt == 0)
        throw std::runtime_error(path + ":3: duplicate timestamp " +
                                 format_iso8601_utc(stamps[1]));
    if (dt < 0)
        throw std::runtime_error(path + ":3: timestamps are not strictly increasing");
    for (std::size_t i = 1; i < stamps.size(); ++i) {
        const std::int64_t d = stamps[i] - stamps[i - 1];
        if (d == 0)
            throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                                     ": duplicate timestamp " + format_iso8601_utc(stamps[i]));
        if (d < 0)
            throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                                     ": timestamps are not strictly increasing");
        if (d != dt)
            throw std::runtime_error(path + ": gap between " +
                                     format_iso8601_utc(stamps[i - 1]) + " and " +
                                     format_iso8601_utc(stamps[i]) + " (expected step " +
                                     std::to_string(dt) + " s)");
    }
    return TimeSeries(stamps[0], static_cast<double>(dt), std::move(values), unit_tag);
}

inline void save_timeseries(const std::string& path, const TimeSeries& ts) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "timestamp,value\n";
    char buf[64];
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto t = ts.start() + static_cast<std::int64_t>(
                                        std::llround(static_cast<double>(i) * ts.dt()));
        std::snprintf(buf, sizeof(buf), "%.10g", ts[i]);
        out << format_iso8601_utc(t) << ',' << buf << '\n';
    }
}

}  // namespace steamflex

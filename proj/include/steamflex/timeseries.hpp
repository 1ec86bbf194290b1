#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steamflex/calendar.hpp"

namespace steamflex {

/// A gap-free, uniformly sampled series with a unit tag. Immutable after
/// construction; all transforms return new series.
class TimeSeries {
public:
    TimeSeries(std::int64_t start_unix_s, double dt_s, std::vector<double> values,
               std::string unit)
        : start_(start_unix_s), dt_(dt_s), values_(std::move(values)), unit_(std::move(unit)) {
        if (!(dt_ > 0)) throw std::invalid_argument("TimeSeries: dt must be > 0");
        if (values_.empty()) throw std::invalid_argument("TimeSeries: values must be non-empty");
        for (double v : values_)
            if (!std::isfinite(v))
                throw std::invalid_argument("TimeSeries: values must be finite");
    }

    std::int64_t start() const { return start_; }
    double dt() const { return dt_; }
    const std::vector<double>& values() const { return values_; }
    const std::string& unit() const { return unit_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double mean() const {
        return std::accumulate(values_.begin(), values_.end(), 0.0) /
               static_cast<double>(values_.size());
    }

    /// Sum of value*dt over the series.
    double integral() const {
        return std::accumulate(values_.begin(), values_.end(), 0.0) * dt_;
    }

private:
    std::int64_t start_;
    double dt_;
    std::vector<double> values_;
    std::string unit_;
};

/// Block-averages onto a coarser step. new_dt must be an integer multiple of
/// ts.dt and the length must divide evenly; the integral is preserved exactly.
inline TimeSeries resample_mean(const TimeSeries& ts, double new_dt) {
    const double ratio = new_dt / ts.dt();
    const auto factor = static_cast<std::size_t>(std::llround(ratio));
    if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9)
        throw std::invalid_argument("resample_mean: new_dt must be an integer multiple of dt");
    if (ts.size() % factor != 0)
        throw std::invalid_argument("resample_mean: series length " + std::to_string(ts.size()) +
                                    " is not divisible by the resampling factor " +
                                    std::to_string(factor));
    std::vector<double> out(ts.size() / factor);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < factor; ++j) acc += ts[i * factor + j];
        out[i] = acc / static_cast<double>(factor);
    }
    return TimeSeries(ts.start(), new_dt, std::move(out), ts.unit());
}

/// Tiles the series periodically out to horizon_steps: out[i] = ts[i mod n].
inline TimeSeries extend_periodic(const TimeSeries& ts, std::size_t horizon_steps) {
    if (horizon_steps == 0)
        throw std::invalid_argument("extend_periodic: horizon_steps must be > 0");
    std::vector<double> out(horizon_steps);
    for (std::size_t i = 0; i < horizon_steps; ++i) out[i] = ts[i % ts.size()];
    return TimeSeries(ts.start(), ts.dt(), std::move(out), ts.unit());
}

/// Scales values on Saturdays and Sundays by `factor`. Day boundaries follow
/// the series' own time of day; the weekday of step 0's calendar day is given
/// explicitly so synthetic series can anchor anywhere.
inline TimeSeries apply_weekend_scaling(const TimeSeries& ts, double factor,
                                        Weekday start_weekday) {
    if (factor < 0.0 || factor > 1.0)
        throw std::invalid_argument("apply_weekend_scaling: factor must be in [0,1]");
    const auto dt = static_cast<std::int64_t>(std::llround(ts.dt()));
    if (dt <= 0 || std::abs(ts.dt() - static_cast<double>(dt)) > 1e-9 || 86400 % dt != 0)
        throw std::invalid_argument("apply_weekend_scaling: dt must divide one day");
    std::int64_t tod0 = ts.start() % 86400;
    if (tod0 < 0) tod0 += 86400;
    std::vector<double> out(ts.values());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::int64_t day = (tod0 + static_cast<std::int64_t>(i) * dt) / 86400;
        const auto wd = static_cast<Weekday>((static_cast<int>(start_weekday) + day % 7) % 7);
        if (is_weekend(wd)) out[i] *= factor;
    }
    return TimeSeries(ts.start(), ts.dt(), std::move(out), ts.unit());
}

/// Convenience overload anchored at the series' own start timestamp.
inline TimeSeries apply_weekend_scaling(const TimeSeries& ts, double factor) {
    return apply_weekend_scaling(ts, factor, weekday_of(ts.start()));
}

/// Elementwise currency conversion; the unit tag changes with the numeraire.
inline TimeSeries convert_currency(const TimeSeries& ts, double rate, std::string new_unit) {
    if (!(rate > 0)) throw std::invalid_argument("convert_currency: rate must be > 0");
    std::vector<double> out(ts.values());
    for (double& v : out) v *= rate;
    return TimeSeries(ts.start(), ts.dt(), std::move(out), std::move(new_unit));
}

}  // namespace steamflex

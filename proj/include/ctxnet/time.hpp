#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace ctxnet {

// Virtual scenario clock. Instants are milliseconds since midnight of the
// scenario epoch date, so the time-of-day of an instant is a pure function of
// its count and wall-clock acceleration never changes logical results.
struct ScenarioClock {
    using duration = std::chrono::milliseconds;
    using rep = duration::rep;
    using period = duration::period;
    using time_point = std::chrono::time_point<ScenarioClock>;
    static constexpr bool is_steady = true;
};

using Instant = ScenarioClock::time_point;
using Duration = std::chrono::milliseconds;

inline constexpr Duration kDay = std::chrono::hours(24);

constexpr Instant instant_ms(std::int64_t ms) { return Instant(Duration(ms)); }

constexpr std::int64_t to_ms(Instant t) { return t.time_since_epoch().count(); }

constexpr Instant at_time_of_day(int hours, int minutes, int seconds = 0) {
    return Instant(std::chrono::hours(hours) + std::chrono::minutes(minutes) +
                   std::chrono::seconds(seconds));
}

// Time of day in [0, 24h) for a non-negative instant.
constexpr Duration time_of_day(Instant t) {
    auto ms = to_ms(t) % kDay.count();
    if (ms < 0) ms += kDay.count();
    return Duration(ms);
}

// Calendar date of the scenario epoch (instants count from its midnight).
struct CalendarDate {
    int year = 2018;
    int month = 11;
    int day = 20;

    friend bool operator==(const CalendarDate&, const CalendarDate&) = default;
};

// "HH:MM:SS" (with ".mmm" when the millisecond part is non-zero), prefixed by
// "+Nd " when the instant lies past the epoch day.
std::string format_instant(Instant t);

}  // namespace ctxnet

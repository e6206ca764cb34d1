#include <algorithm>
#include <cstdio>

#include "json.hpp"

#include "ctxnet/day_interval.hpp"
#include "ctxnet/scheduler_config.hpp"
#include "ctxnet/statement.hpp"

namespace ctxnet {

std::string format_instant(Instant t) {
    const auto ms = to_ms(t);
    const auto days = ms / kDay.count();
    const auto tod = time_of_day(t).count();
    char buf[48];
    const int h = static_cast<int>(tod / 3'600'000);
    const int m = static_cast<int>(tod / 60'000 % 60);
    const int s = static_cast<int>(tod / 1000 % 60);
    const int frac = static_cast<int>(tod % 1000);
    int n = 0;
    if (days > 0) n = std::snprintf(buf, sizeof buf, "+%lldd ", static_cast<long long>(days));
    if (frac != 0)
        std::snprintf(buf + n, sizeof buf - n, "%02d:%02d:%02d.%03d", h, m, s, frac);
    else
        std::snprintf(buf + n, sizeof buf - n, "%02d:%02d:%02d", h, m, s);
    return buf;
}

Statement make_statement(std::string name, bool state, Instant timestamp,
                         std::optional<std::string> source) {
    if (name.empty()) throw ModelError("name", "empty name");
    if (to_ms(timestamp) < 0) throw ModelError("timestamp", "negative timestamp");
    return Statement{std::move(name), state, timestamp, std::move(source)};
}

std::string to_json_line(const Statement& stmt) {
    nlohmann::ordered_json j;
    j["name"] = stmt.name;
    j["state"] = stmt.state;
    j["t_ms"] = to_ms(stmt.timestamp);
    if (stmt.source)
        j["source"] = *stmt.source;
    else
        j["source"] = nullptr;
    return j.dump();
}

Statement statement_from_json_line(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    std::optional<std::string> source;
    if (j.contains("source") && !j.at("source").is_null()) source = j.at("source").get<std::string>();
    return make_statement(j.at("name").get<std::string>(), j.at("state").get<bool>(),
                          instant_ms(j.at("t_ms").get<std::int64_t>()), std::move(source));
}

// ---------------------------------------------------------------------------
// Day intervals

std::string_view to_string(DayLabel label) {
    switch (label) {
        case DayLabel::Morning: return "Morning";
        case DayLabel::Afternoon: return "Afternoon";
        case DayLabel::Evening: return "Evening";
        case DayLabel::Night: return "Night";
    }
    return "?";
}

std::optional<DayLabel> parse_day_label(std::string_view text) {
    for (auto label : kAllDayLabels)
        if (to_string(label) == text) return label;
    return std::nullopt;
}

Duration DayInterval::length() const {
    const auto s = start.count() % kDay.count();
    const auto e = end.count() % kDay.count();
    return Duration(e > s ? e - s : kDay.count() - s + e);
}

bool DayInterval::contains(Duration tod) const {
    const auto s = start.count() % kDay.count();
    const auto e = end.count() % kDay.count();
    const auto x = tod.count();
    if (e > s) return x >= s && x < e;
    return x >= s || x < e;
}

IntervalTable::IntervalTable(std::vector<DayInterval> entries) : entries_(std::move(entries)) {
    if (entries_.size() != kAllDayLabels.size())
        throw ConfigError("interval table must have exactly four entries");
    for (auto label : kAllDayLabels) {
        const auto n = std::count_if(entries_.begin(), entries_.end(),
                                     [&](const DayInterval& d) { return d.label == label; });
        if (n != 1)
            throw ConfigError("interval label " + std::string(to_string(label)) +
                              " must appear exactly once");
    }
    // Split wrapping intervals into [s, 24h) and [0, e) and check that the
    // pieces tile the day with no gaps or overlaps.
    std::vector<std::pair<std::int64_t, std::int64_t>> pieces;
    for (const auto& d : entries_) {
        if (d.start.count() < 0 || d.start > kDay || d.end.count() < 0 || d.end > kDay)
            throw ConfigError("interval bounds must lie within 00:00..24:00");
        const auto s = d.start.count() % kDay.count();
        const auto e = d.end.count() % kDay.count();
        if (e > s) {
            pieces.emplace_back(s, e);
        } else {
            if (s < kDay.count()) pieces.emplace_back(s, kDay.count());
            if (e > 0) pieces.emplace_back(0, e);
        }
    }
    std::sort(pieces.begin(), pieces.end());
    std::int64_t cursor = 0;
    for (const auto& [s, e] : pieces) {
        if (s != cursor) throw ConfigError("interval table does not partition the day");
        cursor = e;
    }
    if (cursor != kDay.count()) throw ConfigError("interval table does not partition the day");
}

const IntervalTable& IntervalTable::standard() {
    using std::chrono::hours;
    static const IntervalTable table({
        {DayLabel::Morning, hours(6), hours(12)},
        {DayLabel::Afternoon, hours(12), hours(18)},
        {DayLabel::Evening, hours(18), hours(24)},
        {DayLabel::Night, hours(0), hours(6)},
    });
    return table;
}

DayLabel IntervalTable::classify(Instant t) const {
    const auto tod = time_of_day(t);
    for (const auto& d : entries_)
        if (d.contains(tod)) return d.label;
    // Unreachable for a validated table.
    throw ConfigError("time of day not covered by interval table");
}

// ---------------------------------------------------------------------------

void SchedulerConfig::validate() const {
    if (!(reasoning_hz > 0) || !std::isfinite(reasoning_hz))
        throw ConfigError("frequency must be positive");
    if (!(ingestion_hz > 0) || !std::isfinite(ingestion_hz))
        throw ConfigError("frequency must be positive");
    if (!(clock_scale >= 1)) throw ConfigError("clock scale must be at least 1");
    period_of(reasoning_hz);
    period_of(ingestion_hz);
}

Duration period_of(double hz) {
    if (!(hz > 0) || !std::isfinite(hz)) throw ConfigError("frequency must be positive");
    const auto ms = static_cast<std::int64_t>(std::llround(1000.0 / hz));
    if (ms <= 0) throw ConfigError("frequency above 1 kHz is not representable on the millisecond clock");
    return Duration(ms);
}

}  // namespace ctxnet

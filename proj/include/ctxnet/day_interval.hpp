#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxnet/time.hpp"

namespace ctxnet {

enum class DayLabel { Morning, Afternoon, Evening, Night };

inline constexpr std::array<DayLabel, 4> kAllDayLabels = {
    DayLabel::Morning, DayLabel::Afternoon, DayLabel::Evening, DayLabel::Night};

std::string_view to_string(DayLabel label);
std::optional<DayLabel> parse_day_label(std::string_view text);

// Half-open [start, end) range of the day; end <= start wraps past midnight.
// An end of 24h is written as 24:00 and is equivalent to 00:00.
struct DayInterval {
    DayLabel label;
    Duration start;
    Duration end;

    Duration length() const;
    bool contains(Duration tod) const;

    friend bool operator==(const DayInterval&, const DayInterval&) = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The a-priori day partition used by interval atoms. Construction validates
// that the entries partition the 24-hour day with each label used once, so
// classification can never fail at query time.
class IntervalTable {
public:
    explicit IntervalTable(std::vector<DayInterval> entries);

    // Morning [06,12), Afternoon [12,18), Evening [18,24), Night [00,06).
    static const IntervalTable& standard();

    DayLabel classify(Instant t) const;
    const std::vector<DayInterval>& entries() const { return entries_; }

    friend bool operator==(const IntervalTable&, const IntervalTable&) = default;

private:
    std::vector<DayInterval> entries_;
};

inline DayLabel classify_day_interval(Instant t, const IntervalTable& table) {
    return table.classify(t);
}

}  // namespace ctxnet

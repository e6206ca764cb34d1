#include <algorithm>
#include <random>
#include <set>

#include "ctxnet/day_interval.hpp"
#include "ctxnet/scheduler_config.hpp"
#include "ctxnet/statement.hpp"
#include "doctest.h"

using namespace ctxnet;
using namespace std::chrono_literals;

TEST_SUITE("core-model") {

TEST_CASE("make_statement keeps exactly the given fields") {
    const auto s = make_statement("WatchingTV", true, at_time_of_day(19, 28));
    CHECK(s.name == "WatchingTV");
    CHECK(s.state);
    CHECK(to_ms(s.timestamp) == (19 * 60 + 28) * 60'000);
    CHECK_FALSE(s.source.has_value());

    const auto z = make_statement("x", false, instant_ms(0));
    CHECK(z.name == "x");
    CHECK_FALSE(z.state);
    CHECK(to_ms(z.timestamp) == 0);

    const auto p = make_statement("PIR2", true, instant_ms(5), "PIR2");
    CHECK(p.source == std::optional<std::string>("PIR2"));
}

TEST_CASE("make_statement rejects an empty name or a negative timestamp") {
    try {
        make_statement("", true, instant_ms(10));
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()) == "empty name");
        CHECK(e.field() == "name");
    }
    try {
        make_statement("x", true, instant_ms(-1));
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()) == "negative timestamp");
        CHECK(e.field() == "timestamp");
    }
}

TEST_CASE("statement JSON line format and round trip") {
    const auto s = make_statement("WatchingTV", true, at_time_of_day(19, 28));
    CHECK(to_json_line(s) == R"({"name":"WatchingTV","state":true,"t_ms":70080000,"source":null})");
    const auto p = make_statement("isIn_LivingRoom", false, instant_ms(12), "PIR2");
    CHECK(to_json_line(p) == R"({"name":"isIn_LivingRoom","state":false,"t_ms":12,"source":"PIR2"})");
    CHECK(statement_from_json_line(to_json_line(s)) == s);
    CHECK(statement_from_json_line(to_json_line(p)) == p);
    CHECK_THROWS(statement_from_json_line(R"({"name":"","state":true,"t_ms":1,"source":null})"));
    CHECK_THROWS(statement_from_json_line("not json"));
}

TEST_CASE("classify with the default table") {
    const auto& table = IntervalTable::standard();
    CHECK(table.classify(at_time_of_day(8, 30)) == DayLabel::Morning);
    CHECK(table.classify(at_time_of_day(0, 0)) == DayLabel::Night);
    CHECK(table.classify(at_time_of_day(19, 28)) == DayLabel::Evening);
    CHECK(table.classify(at_time_of_day(6, 0)) == DayLabel::Morning);
    CHECK(table.classify(at_time_of_day(12, 0)) == DayLabel::Afternoon);
    CHECK(table.classify(at_time_of_day(18, 0)) == DayLabel::Evening);
    CHECK(table.classify(at_time_of_day(5, 59, 59) + 999ms) == DayLabel::Night);
    CHECK(table.classify(at_time_of_day(23, 59, 59) + 999ms) == DayLabel::Evening);
    // Past the epoch day the time of day wraps.
    CHECK(table.classify(at_time_of_day(24 + 3, 0)) == DayLabel::Night);
    CHECK(classify_day_interval(at_time_of_day(13, 0), table) == DayLabel::Afternoon);
}

TEST_CASE("classification is total and unique over random times") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> ms(0, kDay.count() - 1);
    const auto& table = IntervalTable::standard();
    for (int i = 0; i < 100'000; ++i) {
        const auto t = instant_ms(ms(rng));
        int containing = 0;
        for (const auto& e : table.entries()) containing += e.contains(time_of_day(t)) ? 1 : 0;
        REQUIRE(containing == 1);
        const auto label = table.classify(t);
        for (const auto& e : table.entries())
            if (e.contains(time_of_day(t))) CHECK(e.label == label);
    }
}

TEST_CASE("valid partition tables cover exactly 24 hours") {
    std::mt19937_64 rng(5);
    Duration total{0};
    for (const auto& e : IntervalTable::standard().entries()) total += e.length();
    CHECK(total == kDay);

    for (int round = 0; round < 500; ++round) {
        // Four distinct cut points on the circle, labels in random order.
        std::set<std::int64_t> cuts;
        std::uniform_int_distribution<std::int64_t> minute(0, 24 * 60 - 1);
        while (cuts.size() < 4) cuts.insert(minute(rng) * 60'000);
        std::vector<std::int64_t> c(cuts.begin(), cuts.end());
        std::vector<DayLabel> labels(kAllDayLabels.begin(), kAllDayLabels.end());
        std::shuffle(labels.begin(), labels.end(), rng);
        std::vector<DayInterval> entries;
        for (std::size_t i = 0; i < 4; ++i)
            entries.push_back({labels[i], Duration(c[i]), Duration(c[(i + 1) % 4])});
        const IntervalTable table(entries);
        Duration sum{0};
        for (const auto& e : table.entries()) sum += e.length();
        CHECK(sum == kDay);
        for (int k = 0; k < 50; ++k) {
            const auto t = instant_ms(minute(rng) * 60'000 + 123);
            int containing = 0;
            for (const auto& e : table.entries()) containing += e.contains(time_of_day(t)) ? 1 : 0;
            CHECK(containing == 1);
        }
    }
}

TEST_CASE("non-partitioning tables fail at construction") {
    const auto h = [](int x) { return Duration(std::chrono::hours(x)); };
    // Gap between 11 and 12.
    CHECK_THROWS_AS(IntervalTable({{DayLabel::Morning, h(6), h(11)},
                                   {DayLabel::Afternoon, h(12), h(18)},
                                   {DayLabel::Evening, h(18), h(24)},
                                   {DayLabel::Night, h(0), h(6)}}),
                    ConfigError);
    // Overlap.
    CHECK_THROWS_AS(IntervalTable({{DayLabel::Morning, h(6), h(13)},
                                   {DayLabel::Afternoon, h(12), h(18)},
                                   {DayLabel::Evening, h(18), h(24)},
                                   {DayLabel::Night, h(0), h(6)}}),
                    ConfigError);
    // Duplicate label.
    CHECK_THROWS_AS(IntervalTable({{DayLabel::Morning, h(6), h(12)},
                                   {DayLabel::Morning, h(12), h(18)},
                                   {DayLabel::Evening, h(18), h(24)},
                                   {DayLabel::Night, h(0), h(6)}}),
                    ConfigError);
    // Three entries.
    CHECK_THROWS_AS(IntervalTable({{DayLabel::Morning, h(6), h(12)},
                                   {DayLabel::Afternoon, h(12), h(18)},
                                   {DayLabel::Evening, h(18), h(6)}}),
                    ConfigError);
    // A wrapping night is fine.
    const IntervalTable shifted({{DayLabel::Morning, h(5), h(12)},
                                 {DayLabel::Afternoon, h(12), h(17)},
                                 {DayLabel::Evening, h(17), h(22)},
                                 {DayLabel::Night, h(22), h(5)}});
    CHECK(shifted.classify(at_time_of_day(23, 0)) == DayLabel::Night);
    CHECK(shifted.classify(at_time_of_day(2, 0)) == DayLabel::Night);
    CHECK(shifted.classify(at_time_of_day(5, 0)) == DayLabel::Morning);
}

TEST_CASE("day labels parse and print") {
    for (auto l : kAllDayLabels) CHECK(parse_day_label(to_string(l)) == l);
    CHECK_FALSE(parse_day_label("Noon").has_value());
}

TEST_CASE("scheduler config") {
    SchedulerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.ingestion_hz = 10;
    CHECK(cfg.reasoning_hz == 2.0);  // independent knobs
    cfg.reasoning_hz = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), "frequency must be positive", ConfigError);
    cfg.reasoning_hz = 2;
    cfg.ingestion_hz = -1;
    CHECK_THROWS_WITH_AS(cfg.validate(), "frequency must be positive", ConfigError);
    cfg.ingestion_hz = 2;
    cfg.clock_scale = 0.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), "clock scale must be at least 1", ConfigError);
    cfg.clock_scale = 1;
    CHECK_NOTHROW(cfg.validate());

    CHECK(period_of(2.0) == 500ms);
    CHECK(period_of(1.0 / 3.0) == 3000ms);
    CHECK(period_of(0.333) == 3003ms);
    CHECK(period_of(10.0) == 100ms);
    CHECK_THROWS_AS(period_of(0), ConfigError);
}

TEST_CASE("format_instant") {
    CHECK(format_instant(at_time_of_day(8, 1)) == "08:01:00");
    CHECK(format_instant(at_time_of_day(8, 1) + 60ms) == "08:01:00.060");
    CHECK(format_instant(at_time_of_day(24 + 1, 2, 3)) == "+1d 01:02:03");
}

}  // TEST_SUITE

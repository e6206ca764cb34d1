#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ctxnet/runtime_store.hpp"

namespace ctxnet {

// A raw reading as a perception module would report it: PIRs and contacts
// report 1/0, the brightness sensor reports a level.
struct SensorReading {
    Duration offset{0};
    std::string sensor;
    double value = 0.0;

    friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

struct Scenario {
    CalendarDate date;
    Instant start{};
    std::vector<SensorReading> steps;  // sorted by (offset, sensor)
    Duration duration{0};

    Instant end() const { return start + duration; }
    // Throws ModelError unless offsets are non-negative, strictly increasing
    // per sensor, and within the duration.
    void validate() const;
};

// Offsets of the eight-minute stereotypical day, relative to the start.
struct Fig4Timing {
    Duration kitchen_enter = std::chrono::seconds(0);
    Duration cabinet_open = std::chrono::seconds(60);
    Duration cabinet_close = std::chrono::seconds(65);
    Duration living_enter = std::chrono::seconds(120);
    Duration tv_on = std::chrono::seconds(180);
    Duration tv_off = std::chrono::seconds(210);
    Duration bedroom_enter = std::chrono::seconds(240);
    Duration bed_on = std::chrono::seconds(300);
    // The bed PIR fires from bed_on through this offset.
    Duration bed_motion_until = std::chrono::seconds(360);
    // Leaving the bed for the bathroom. Five seconds after the bed motion
    // ends so the last bed-motion sample is reasoned on while the occupant is
    // still in the bedroom even at a 3 s reasoning period.
    Duration bathroom_enter = std::chrono::seconds(365);
    Duration toilet_use = std::chrono::seconds(425);
    Duration toilet_release = std::chrono::seconds(435);
    Duration end = std::chrono::minutes(8);
    // Room PIRs re-fire at this cadence while the room is occupied; must stay
    // below the 60 s freshness window.
    Duration pir_refresh = std::chrono::seconds(10);
    Duration bed_pir_refresh = std::chrono::seconds(10);
    double tv_on_brightness = 80.0;
    double tv_off_brightness = 10.0;
};

// Sensor ids follow SensorCatalog::standard().
Scenario fig4_scenario(CalendarDate date, Instant start, const Fig4Timing& timing = {});
inline Scenario fig4_scenario(Instant start) { return fig4_scenario(CalendarDate{}, start); }

Scenario empty_scenario(CalendarDate date, Instant start, Duration duration);

// `times` back-to-back copies of the scenario.
Scenario looped(const Scenario& scenario, int times);

// Uniform timestamp jitter in [-max_jitter, +max_jitter] per reading, clamped
// to keep per-sensor order and the scenario bounds.
Scenario jittered(const Scenario& scenario, Duration max_jitter, std::uint64_t seed);

// {"t_ms":..,"sensor":..,"value":..} per line, absolute instants.
void write_scenario(std::ostream& os, const Scenario& scenario);
Scenario read_scenario(std::istream& is, CalendarDate date, Instant start, std::optional<Duration> duration);

// Perception-layer stand-in: turns readings into sensor statements and
// republishes every known sensor's latest statement at f_s. A statement
// carries its reading's timestamp, so republishing is idempotent.
class Aggregator {
public:
    Aggregator(const Scenario& scenario, const NodeDef& contextualizer, double ingestion_hz);

    // Publishes all samples due at or before `now`.
    void advance_to(Instant now, StatementStore& store);
    std::size_t samples() const { return samples_; }

private:
    struct Timed {
        Instant at;
        Statement stmt;
    };
    std::vector<Timed> readings_;
    std::size_t next_reading_ = 0;
    Instant next_sample_;
    Duration period_;
    std::size_t samples_ = 0;
    std::map<std::string, Statement> latest_;
};

// An activity the oracle expects, with the instant its rule body became
// satisfied.
struct ExpectedActivity {
    std::string node;
    std::string name;
    Instant satisfied_at{};

    friend bool operator==(const ExpectedActivity&, const ExpectedActivity&) = default;
};

// Brute force over the complete statement timeline, sharing no evaluation
// code with the engine: derives the contextualizer's statements from every
// reading, then for each activity node tests every rule body against the
// full history at every instant where an atom can change truth value, with
// rising-edge dedup. Covers contextualizer-to-activity edges (the shipped
// star topology) and ignores listeners, so it matches PAE always and CAE
// whenever each activity's context holds when its pattern completes.
std::vector<ExpectedActivity> replay_oracle(const Scenario& scenario, const NetworkGraph& graph);

// Sorted activity names, i.e. the multiset.
std::vector<std::string> activity_multiset(const std::vector<Statement>& activities);
std::vector<std::string> activity_multiset(const std::vector<ExpectedActivity>& expected);

// First disagreement between engine output and the oracle: a different
// multiset, or an emission not within [oracle instant, oracle instant +
// tolerance]. Empty when they agree.
std::optional<std::string> compare_with_oracle(const std::vector<Statement>& activities,
                                               const std::vector<ExpectedActivity>& expected,
                                               Duration tolerance);

struct SimulationResult {
    std::vector<TickReport> reports;
    std::vector<Statement> activities;
    std::size_t ingested = 0;
};

// Resets the graph, then runs the scenario from its start to its end with
// a fresh clock and the aggregator feeding `store` (a private store when
// null).
SimulationResult simulate(NetworkGraph& graph, const Scenario& scenario, const SchedulerConfig& cfg,
                          StatementStore* store = nullptr,
                          std::function<void(const TickReport&)> on_tick = {});

}  // namespace ctxnet

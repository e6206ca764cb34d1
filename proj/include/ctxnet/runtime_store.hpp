#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctxnet/network.hpp"
#include "ctxnet/scheduler_config.hpp"

namespace ctxnet {

// Database stand-in. `latest` is the per-name surface the reasoning layer
// reads; asds_log is every ingested statement; ias_log every inferred
// activity. All members are safe to call concurrently; snapshot reads never
// observe a partially written statement.
class StatementStore {
public:
    UpsertOutcome ingest(const Statement& stmt);
    void record_activity(const Statement& stmt);

    // Latest entries changed since `cursor` (a value previously returned by
    // this call, 0 initially). Advances the cursor.
    std::vector<Statement> changes_since(std::uint64_t& cursor) const;
    std::vector<Statement> snapshot() const;
    std::optional<Statement> latest(const std::string& name) const;
    std::size_t latest_size() const;

    std::vector<Statement> asds_log() const;
    std::vector<Statement> ias_log() const;
    std::size_t asds_size() const;
    std::size_t ias_size() const;

    // Stream appended log lines (JSON lines) as they happen. Either may be
    // null. The streams must outlive the store or be detached.
    void attach_sinks(std::ostream* asds, std::ostream* ias);
    // Keep only counts of the asds log in memory (for very long runs).
    void set_retain_asds(bool retain);

private:
    struct Entry {
        Statement stmt;
        std::uint64_t seq = 0;
    };

    mutable std::mutex mu_;
    std::unordered_map<std::string, Entry> latest_;
    std::uint64_t next_seq_ = 1;
    std::vector<Statement> asds_;
    std::vector<Statement> ias_;
    std::size_t asds_count_ = 0;
    bool retain_asds_ = true;
    std::ostream* asds_sink_ = nullptr;
    std::ostream* ias_sink_ = nullptr;
};

// Virtual time on the scenario clock. Instants count from midnight of the
// epoch date; advancing by a wall duration moves by duration * scale.
class VirtualClock {
public:
    VirtualClock(CalendarDate epoch = {}, Instant now = {}, double scale = kUnpaced);

    const CalendarDate& epoch() const { return epoch_; }
    Instant now() const { return now_; }
    double scale() const { return scale_; }

    // Monotone: an earlier target leaves the clock unchanged.
    void advance_to(Instant t);
    void advance_wall(std::chrono::nanoseconds wall);

    std::string iso(Instant t) const;

private:
    CalendarDate epoch_;
    Instant now_;
    double scale_;
};

// Parses "YYYY-MM-DDTHH:MM[:SS]" into an epoch date and an instant on it.
// Throws ConfigError on malformed input.
std::pair<CalendarDate, Instant> parse_datetime(const std::string& text);

struct RunHooks {
    // Called with each tick instant before the store is read; the simulator
    // ingests the samples due by then.
    std::function<void(Instant)> before_tick;
    std::function<void(const TickReport&)> on_tick;
};

// Drives graph.tick at every f_o period from clock.now() while the tick
// instant is before `until`, feeding each tick the latest entries changed
// since the previous one and logging activity emissions to ias. A tick
// whose wall time exceeds the reasoning period is flagged as an overrun; a
// late tick delays the next one, never overlaps or skips it.
// Throws ConfigError for an invalid config or graph.
std::vector<TickReport> run(NetworkGraph& graph, StatementStore& store, const SchedulerConfig& cfg,
                            VirtualClock& clock, Instant until, const RunHooks& hooks = {});

}  // namespace ctxnet

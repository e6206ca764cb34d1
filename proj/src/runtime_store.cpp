#include "ctxnet/runtime_store.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

namespace ctxnet {

UpsertOutcome StatementStore::ingest(const Statement& stmt) {
    std::lock_guard lock(mu_);
    ++asds_count_;
    if (retain_asds_) asds_.push_back(stmt);
    if (asds_sink_) *asds_sink_ << to_json_line(stmt) << '\n';

    auto [it, inserted] = latest_.try_emplace(stmt.name, Entry{stmt, next_seq_});
    if (inserted) {
        ++next_seq_;
        return UpsertOutcome::Inserted;
    }
    Entry& e = it->second;
    if (stmt.timestamp < e.stmt.timestamp) return UpsertOutcome::Discarded;
    if (e.stmt == stmt) return UpsertOutcome::Unchanged;
    e.stmt = stmt;
    e.seq = next_seq_++;
    return UpsertOutcome::Replaced;
}

void StatementStore::record_activity(const Statement& stmt) {
    std::lock_guard lock(mu_);
    ias_.push_back(stmt);
    if (ias_sink_) *ias_sink_ << to_json_line(stmt) << '\n';
}

std::vector<Statement> StatementStore::changes_since(std::uint64_t& cursor) const {
    std::lock_guard lock(mu_);
    std::vector<std::pair<std::uint64_t, const Statement*>> changed;
    for (const auto& [name, e] : latest_)
        if (e.seq > cursor) changed.emplace_back(e.seq, &e.stmt);
    std::sort(changed.begin(), changed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Statement> out;
    out.reserve(changed.size());
    for (const auto& [seq, s] : changed) out.push_back(*s);
    cursor = next_seq_ - 1;
    return out;
}

std::vector<Statement> StatementStore::snapshot() const {
    std::lock_guard lock(mu_);
    std::vector<Statement> out;
    out.reserve(latest_.size());
    for (const auto& [name, e] : latest_) out.push_back(e.stmt);
    return out;
}

std::optional<Statement> StatementStore::latest(const std::string& name) const {
    std::lock_guard lock(mu_);
    const auto it = latest_.find(name);
    if (it == latest_.end()) return std::nullopt;
    return it->second.stmt;
}

std::size_t StatementStore::latest_size() const {
    std::lock_guard lock(mu_);
    return latest_.size();
}

std::vector<Statement> StatementStore::asds_log() const {
    std::lock_guard lock(mu_);
    return asds_;
}

std::vector<Statement> StatementStore::ias_log() const {
    std::lock_guard lock(mu_);
    return ias_;
}

std::size_t StatementStore::asds_size() const {
    std::lock_guard lock(mu_);
    return asds_count_;
}

std::size_t StatementStore::ias_size() const {
    std::lock_guard lock(mu_);
    return ias_.size();
}

void StatementStore::attach_sinks(std::ostream* asds, std::ostream* ias) {
    std::lock_guard lock(mu_);
    asds_sink_ = asds;
    ias_sink_ = ias;
}

void StatementStore::set_retain_asds(bool retain) {
    std::lock_guard lock(mu_);
    retain_asds_ = retain;
}

// ---------------------------------------------------------------------------

VirtualClock::VirtualClock(CalendarDate epoch, Instant now, double scale)
    : epoch_(epoch), now_(now), scale_(scale) {
    if (!(scale >= 1)) throw ConfigError("clock scale must be at least 1");
}

void VirtualClock::advance_to(Instant t) { now_ = std::max(now_, t); }

void VirtualClock::advance_wall(std::chrono::nanoseconds wall) {
    if (wall.count() <= 0) return;
    if (scale_ == kUnpaced) return;
    const double ms = std::chrono::duration<double, std::milli>(wall).count() * scale_;
    now_ += Duration(static_cast<std::int64_t>(ms));
}

std::string VirtualClock::iso(Instant t) const {
    const auto days = to_ms(t) / kDay.count();
    const auto tod = time_of_day(t).count();
    // Civil date arithmetic on the proleptic Gregorian calendar.
    using namespace std::chrono;
    const sys_days base = year_month_day{year{epoch_.year}, month{static_cast<unsigned>(epoch_.month)},
                                         day{static_cast<unsigned>(epoch_.day)}};
    const year_month_day ymd{base + std::chrono::days{days}};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(tod / 3'600'000), static_cast<long long>(tod / 60'000 % 60),
                  static_cast<long long>(tod / 1000 % 60));
    return buf;
}

std::pair<CalendarDate, Instant> parse_datetime(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail = 0;
    const int n = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail);
    if (n < 5 || n == 7) throw ConfigError("bad datetime '" + text + "', expected YYYY-MM-DDTHH:MM[:SS]");
    if (n == 5) {
        // Reject trailing garbage after HH:MM.
        char extra = 0;
        if (std::sscanf(text.c_str(), "%*4d-%*2d-%*2dT%*2d:%*2d%c", &extra) == 1)
            throw ConfigError("bad datetime '" + text + "', expected YYYY-MM-DDTHH:MM[:SS]");
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0)
        throw ConfigError("datetime out of range: '" + text + "'");
    return {CalendarDate{y, mo, d}, at_time_of_day(h, mi, s)};
}

// ---------------------------------------------------------------------------

std::vector<TickReport> run(NetworkGraph& graph, StatementStore& store, const SchedulerConfig& cfg,
                            VirtualClock& clock, Instant until, const RunHooks& hooks) {
    cfg.validate();
    if (graph.nodes().empty()) throw ConfigError("network has no nodes");
    if (const auto issues = graph.validate(); !issues.empty())
        throw ConfigError("network does not validate: " + issues.front().item + ": " +
                          issues.front().message);
    if (!(until > clock.now())) throw ConfigError("run end must lie after the clock's current instant");

    using wall_clock = std::chrono::steady_clock;
    const Duration period = period_of(cfg.reasoning_hz);
    const Instant start = clock.now();
    const bool paced = cfg.clock_scale != kUnpaced;
    const auto wall_start = wall_clock::now();

    std::vector<TickReport> reports;
    std::uint64_t cursor = 0;
    for (Instant t = start; t < until; t += period) {
        if (paced) {
            const auto offset = std::chrono::duration<double, std::milli>(t - start) / cfg.clock_scale;
            const auto due = wall_start + std::chrono::duration_cast<wall_clock::duration>(offset);
            // A tick that is already late starts at once: delay, never skip.
            std::this_thread::sleep_until(due);
        }
        clock.advance_to(t);
        if (hooks.before_tick) hooks.before_tick(t);
        const auto tick_start = wall_clock::now();
        const auto inbound = store.changes_since(cursor);
        TickReport report = graph.tick(t, inbound);
        for (const auto& s : report.emissions)
            if (graph.is_activity(s.source.value_or(""))) store.record_activity(s);
        report.wall = wall_clock::now() - tick_start;
        report.overrun = report.wall > period;
        if (hooks.on_tick) hooks.on_tick(report);
        reports.push_back(std::move(report));
    }
    clock.advance_to(until);
    return reports;
}

}  // namespace ctxnet

#include "ctxnet/simulator.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ctxnet {

namespace {

void sort_steps(std::vector<SensorReading>& steps) {
    std::stable_sort(steps.begin(), steps.end(), [](const SensorReading& a, const SensorReading& b) {
        if (a.offset != b.offset) return a.offset < b.offset;
        return a.sensor < b.sensor;
    });
}

}  // namespace

void Scenario::validate() const {
    std::map<std::string, Duration> last;
    for (const auto& s : steps) {
        if (s.offset.count() < 0) throw ModelError("offset", "negative scenario offset");
        if (s.offset > duration) throw ModelError("duration", "scenario step beyond its duration");
        if (s.sensor.empty()) throw ModelError("sensor", "scenario step without sensor");
        auto [it, inserted] = last.try_emplace(s.sensor, s.offset);
        if (!inserted) {
            if (s.offset <= it->second)
                throw ModelError("offset", "offsets of sensor '" + s.sensor + "' are not strictly increasing");
            it->second = s.offset;
        }
    }
}

Scenario fig4_scenario(CalendarDate date, Instant start, const Fig4Timing& tm) {
    Scenario sc;
    sc.date = date;
    sc.start = start;
    sc.duration = tm.end;
    auto& st = sc.steps;
    const auto occupy = [&](const char* pir, Duration from, Duration until) {
        for (Duration t = from; t < until; t += tm.pir_refresh) st.push_back({t, pir, 1.0});
    };
    occupy("PIR1", tm.kitchen_enter, tm.living_enter);
    occupy("PIR2", tm.living_enter, tm.bedroom_enter);
    occupy("PIR3", tm.bedroom_enter, tm.bathroom_enter);
    occupy("PIR4", tm.bathroom_enter, tm.end);

    st.push_back({tm.cabinet_open, "C1", 1.0});
    st.push_back({tm.cabinet_close, "C1", 0.0});
    st.push_back({tm.tv_on, "brightness", tm.tv_on_brightness});
    st.push_back({tm.tv_off, "brightness", tm.tv_off_brightness});
    st.push_back({tm.bed_on, "C2", 1.0});
    for (Duration t = tm.bed_on; t <= tm.bed_motion_until; t += tm.bed_pir_refresh)
        st.push_back({t, "PIR5", 1.0});
    st.push_back({tm.bathroom_enter, "C2", 0.0});
    st.push_back({tm.toilet_use, "C3", 1.0});
    st.push_back({tm.toilet_release, "C3", 0.0});
    sort_steps(st);
    sc.validate();
    return sc;
}

Scenario empty_scenario(CalendarDate date, Instant start, Duration duration) {
    Scenario sc;
    sc.date = date;
    sc.start = start;
    sc.duration = duration;
    return sc;
}

Scenario looped(const Scenario& scenario, int times) {
    Scenario out = scenario;
    out.steps.clear();
    for (int i = 0; i < times; ++i)
        for (const auto& s : scenario.steps)
            out.steps.push_back({s.offset + scenario.duration * i, s.sensor, s.value});
    out.duration = scenario.duration * std::max(times, 0);
    sort_steps(out.steps);
    return out;
}

Scenario jittered(const Scenario& scenario, Duration max_jitter, std::uint64_t seed) {
    Scenario out = scenario;
    if (max_jitter.count() <= 0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> dist(-max_jitter.count(), max_jitter.count());
    for (auto& s : out.steps) {
        const auto shifted = s.offset.count() + dist(rng);
        s.offset = Duration(std::clamp<std::int64_t>(shifted, 0, out.duration.count()));
    }
    // Restore strict per-sensor order where jitter swapped neighbours.
    std::map<std::string, std::vector<SensorReading*>> by_sensor;
    for (auto& s : out.steps) by_sensor[s.sensor].push_back(&s);
    for (auto& [sensor, seq] : by_sensor) {
        std::vector<Duration> offsets;
        for (auto* s : seq) offsets.push_back(s->offset);
        std::sort(offsets.begin(), offsets.end());
        for (std::size_t i = 1; i < offsets.size(); ++i)
            if (offsets[i] <= offsets[i - 1]) offsets[i] = offsets[i - 1] + Duration(1);
        for (std::size_t i = 0; i < seq.size(); ++i) seq[i]->offset = offsets[i];
    }
    for (const auto& s : out.steps) out.duration = std::max(out.duration, s.offset);
    sort_steps(out.steps);
    out.validate();
    return out;
}

void write_scenario(std::ostream& os, const Scenario& scenario) {
    for (const auto& s : scenario.steps) {
        nlohmann::ordered_json j;
        j["t_ms"] = to_ms(scenario.start + s.offset);
        j["sensor"] = s.sensor;
        j["value"] = s.value;
        os << j.dump() << '\n';
    }
}

Scenario read_scenario(std::istream& is, CalendarDate date, Instant start, std::optional<Duration> duration) {
    Scenario sc;
    sc.date = date;
    sc.start = start;
    std::string line;
    Duration last{0};
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line);
        const auto t = instant_ms(j.at("t_ms").get<std::int64_t>());
        if (t < start) throw ModelError("t_ms", "scenario reading before the scenario start");
        SensorReading r{t - start, j.at("sensor").get<std::string>(), j.at("value").get<double>()};
        last = std::max(last, r.offset);
        sc.steps.push_back(std::move(r));
    }
    sc.duration = duration.value_or(last + Duration(1));
    sort_steps(sc.steps);
    sc.validate();
    return sc;
}

// ---------------------------------------------------------------------------

Aggregator::Aggregator(const Scenario& scenario, const NodeDef& contextualizer, double ingestion_hz)
    : next_sample_(scenario.start), period_(period_of(ingestion_hz)) {
    for (const auto& s : scenario.steps) {
        const SensorMap* map = contextualizer.find_map(s.sensor);
        const bool state = map ? map->binarize(s.value) : s.value != 0.0;
        const Instant at = scenario.start + s.offset;
        readings_.push_back({at, Statement{s.sensor, state, at, s.sensor}});
    }
}

void Aggregator::advance_to(Instant now, StatementStore& store) {
    while (next_sample_ <= now) {
        while (next_reading_ < readings_.size() && readings_[next_reading_].at <= next_sample_) {
            const auto& r = readings_[next_reading_++].stmt;
            latest_.insert_or_assign(r.name, r);
        }
        for (const auto& [sensor, stmt] : latest_) store.ingest(stmt);
        ++samples_;
        next_sample_ += period_;
    }
}

// ---------------------------------------------------------------------------
// Replay oracle. Deliberately written against raw timelines rather than
// Node/NetworkGraph evaluation.

namespace {

struct Fact {
    std::string name;
    bool state;
    Instant t;
};

std::vector<Fact> place_timeline(const Scenario& scenario, const NodeDef& place) {
    struct Raw {
        Instant t;
        std::string sensor;
        double value;
    };
    std::vector<Raw> raw;
    for (const auto& s : scenario.steps) raw.push_back({scenario.start + s.offset, s.sensor, s.value});
    std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
        return a.t != b.t ? a.t < b.t : a.sensor < b.sensor;
    });

    std::vector<Fact> facts;
    std::map<std::string, bool> level;  // last state written per derived name
    std::optional<std::string> room;     // target of the occupied room
    const auto write = [&](const std::string& name, bool state, Instant t) {
        facts.push_back({name, state, t});
        level[name] = state;
    };

    for (const auto& r : raw) {
        const SensorMap* m = nullptr;
        for (const auto& candidate : place.maps)
            if (candidate.sensor == r.sensor) m = &candidate;
        if (m == nullptr) {
            write(r.sensor, r.value != 0.0, r.t);
            continue;
        }
        const bool on = m->kind == MapKind::Threshold ? r.value > m->threshold : r.value != 0.0;
        if (m->kind == MapKind::Location) {
            if (!on) continue;
            if (room != m->target) {
                write(m->target, true, r.t);
                for (const auto& other : place.maps) {
                    if (other.kind != MapKind::Location || other.target == m->target) continue;
                    const auto it = level.find(other.target);
                    if (it == level.end() || it->second) write(other.target, false, r.t);
                }
                room = m->target;
            }
            write("motion_" + m->room, true, r.t);
        } else if (m->kind == MapKind::Motion) {
            if (on) write(m->target, true, r.t);
        } else {
            const auto it = level.find(m->target);
            if (it == level.end() || it->second != on) write(m->target, on, r.t);
        }
    }
    return facts;
}

struct Seen {
    bool state;
    Instant t;
};

// Latest fact per name with t <= at, scanning the whole history.
std::map<std::string, Seen> state_at(const std::vector<Fact>& history, Instant at) {
    std::map<std::string, Seen> out;
    for (const auto& f : history) {
        if (f.t > at) continue;
        const auto it = out.find(f.name);
        if (it == out.end() || f.t >= it->second.t) out[f.name] = {f.state, f.t};
    }
    return out;
}

bool holds(const Atom& a, const std::map<std::string, Seen>& s, Instant now, const IntervalTable& table) {
    const auto subject = s.find(a.subject);
    if (subject == s.end()) return false;
    const Seen& x = subject->second;
    if (a.kind == AtomKind::Is) return x.state == a.expected_state;
    if (a.kind == AtomKind::InInterval) return table.classify(x.t) == a.interval;
    if (!x.state) return false;
    if (a.kind == AtomKind::HeldFor) return (now - x.t).count() >= a.delta.count();
    if (a.kind == AtomKind::FreshWithin) return (now - x.t).count() <= a.delta.count();
    const auto ref = s.find(a.object);
    return ref != s.end() && ref->second.state && to_ms(x.t) - to_ms(ref->second.t) >= a.delta.count();
}

}  // namespace

std::vector<ExpectedActivity> replay_oracle(const Scenario& scenario, const NetworkGraph& graph) {
    std::vector<ExpectedActivity> out;
    if (graph.nodes().empty()) return out;
    const NodeDef& place = graph.nodes().front().definition();
    const auto timeline = place_timeline(scenario, place);

    for (std::size_t idx = 1; idx < graph.nodes().size(); ++idx) {
        const Node& node = graph.nodes()[idx];
        const NodeDef& def = node.definition();
        std::set<std::string> carried;
        for (const auto& e : graph.edges())
            if (e.from == place.id && e.to == def.id) carried.insert(e.carries.begin(), e.carries.end());

        std::vector<Fact> history;
        for (const auto& f : timeline)
            if (carried.count(f.name)) history.push_back(f);

        std::set<std::int64_t> deltas;
        for (const auto& r : def.rules)
            for (const auto& a : r.body) deltas.insert(a.delta.count());
        std::set<Instant> instants;
        for (const auto& f : history) {
            instants.insert(f.t);
            for (auto d : deltas) {
                instants.insert(f.t + Duration(d));
                instants.insert(f.t + Duration(d + 1));
            }
        }

        std::vector<char> previously(def.rules.size(), 0);
        for (const Instant at : instants) {
            if (at < scenario.start || at >= scenario.end()) continue;
            std::vector<char> now_sat(def.rules.size(), 0);
            bool grew = true;
            while (grew) {
                grew = false;
                const auto state = state_at(history, at);
                for (std::size_t r = 0; r < def.rules.size(); ++r) {
                    if (now_sat[r]) continue;
                    const auto& body = def.rules[r].body;
                    bool all = true;
                    for (const auto& a : body) all = all && holds(a, state, at, node.intervals());
                    if (!all) continue;
                    now_sat[r] = 1;
                    if (!previously[r]) {
                        out.push_back({def.id, def.rules[r].head, at});
                        history.push_back({def.rules[r].head, true, at});
                        grew = true;
                    }
                }
            }
            previously = now_sat;
        }
    }
    std::sort(out.begin(), out.end(), [](const ExpectedActivity& a, const ExpectedActivity& b) {
        if (a.satisfied_at != b.satisfied_at) return a.satisfied_at < b.satisfied_at;
        if (a.node != b.node) return a.node < b.node;
        return a.name < b.name;
    });
    return out;
}

std::vector<std::string> activity_multiset(const std::vector<Statement>& activities) {
    std::vector<std::string> names;
    for (const auto& s : activities) names.push_back(s.name);
    std::sort(names.begin(), names.end());
    return names;
}

std::vector<std::string> activity_multiset(const std::vector<ExpectedActivity>& expected) {
    std::vector<std::string> names;
    for (const auto& e : expected) names.push_back(e.name);
    std::sort(names.begin(), names.end());
    return names;
}

std::optional<std::string> compare_with_oracle(const std::vector<Statement>& activities,
                                               const std::vector<ExpectedActivity>& expected,
                                               Duration tolerance) {
    std::map<std::string, std::vector<Instant>> got, want;
    for (const auto& s : activities) got[s.name].push_back(s.timestamp);
    for (const auto& e : expected) want[e.name].push_back(e.satisfied_at);
    std::set<std::string> names;
    for (const auto& [n, v] : got) names.insert(n);
    for (const auto& [n, v] : want) names.insert(n);
    for (const auto& name : names) {
        auto g = got[name];
        auto w = want[name];
        std::sort(g.begin(), g.end());
        std::sort(w.begin(), w.end());
        if (g.size() != w.size()) {
            std::ostringstream os;
            os << name << ": engine emitted " << g.size() << "x, oracle expects " << w.size() << "x";
            if (!g.empty()) os << " (first engine emission at " << format_instant(g.front()) << ")";
            if (!w.empty()) os << " (first expected at " << format_instant(w.front()) << ")";
            return os.str();
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g[i] < w[i] || g[i] - w[i] > tolerance) {
                std::ostringstream os;
                os << name << ": engine emitted at " << format_instant(g[i]) << ", oracle satisfied at "
                   << format_instant(w[i]) << " (tolerance " << tolerance.count() << " ms)";
                return os.str();
            }
        }
    }
    return std::nullopt;
}

SimulationResult simulate(NetworkGraph& graph, const Scenario& scenario, const SchedulerConfig& cfg,
                          StatementStore* store, std::function<void(const TickReport&)> on_tick) {
    graph.reset();
    StatementStore local;
    StatementStore& db = store ? *store : local;
    if (graph.nodes().empty()) throw ConfigError("network has no nodes");
    Aggregator aggregator(scenario, graph.contextualizer().definition(), cfg.ingestion_hz);
    VirtualClock clock(scenario.date, scenario.start, cfg.clock_scale);

    RunHooks hooks;
    hooks.before_tick = [&](Instant t) { aggregator.advance_to(t, db); };
    hooks.on_tick = std::move(on_tick);

    SimulationResult result;
    const auto ias_before = db.ias_size();
    result.reports = run(graph, db, cfg, clock, scenario.end(), hooks);
    const auto ias = db.ias_log();
    result.activities.assign(ias.begin() + static_cast<std::ptrdiff_t>(std::min(ias_before, ias.size())), ias.end());
    result.ingested = db.asds_size();
    return result;
}

}  // namespace ctxnet

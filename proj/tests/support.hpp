#pragma once

// Shared by the unit tests and the acceptance binary: random trace
// generators and small brute-force oracles that share no evaluation code
// with the engine.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ctxnet/activity_library.hpp"
#include "ctxnet/simulator.hpp"

namespace testsupport {

using namespace ctxnet;
using namespace std::chrono_literals;

inline int uniform(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

// ---------------------------------------------------------------------------
// Node-level oracle: latest-value semantics re-derived from the whole trace
// at every trace instant.

struct Fact {
    bool state;
    Instant t;
};

inline bool brute_atom(const Atom& a, const std::map<std::string, Fact>& s, Instant now,
                       const IntervalTable& table) {
    if (!s.count(a.subject)) return false;
    const Fact x = s.at(a.subject);
    switch (a.kind) {
        case AtomKind::Is:
            return x.state == a.expected_state;
        case AtomKind::HeldFor:
            return x.state && to_ms(now) - to_ms(x.t) >= a.delta.count();
        case AtomKind::FreshWithin:
            return x.state && to_ms(now) - to_ms(x.t) <= a.delta.count();
        case AtomKind::InInterval: {
            // Scan the table directly instead of asking it to classify.
            const auto tod = time_of_day(x.t);
            for (const auto& e : table.entries())
                if (e.contains(tod)) return e.label == a.interval;
            return false;
        }
        case AtomKind::OccurredAfter:
            if (!s.count(a.object)) return false;
            return x.state && s.at(a.object).state && to_ms(x.t) >= to_ms(s.at(a.object).t) + a.delta.count();
    }
    return false;
}

struct Emission {
    std::string name;
    Instant at;
    friend bool operator==(const Emission&, const Emission&) = default;
    friend bool operator<(const Emission& a, const Emission& b) {
        return a.at != b.at ? a.at < b.at : a.name < b.name;
    }
};

// Trace timestamps are non-decreasing; the node is evaluated at each
// distinct timestamp after all statements carrying it arrived.
inline std::vector<Emission> brute_node(const std::vector<Rule>& rules, const std::vector<Statement>& trace,
                                        const IntervalTable& table) {
    std::vector<Emission> out;
    std::vector<std::pair<std::string, Fact>> history;  // in arrival order
    std::set<Instant> instants;
    for (const auto& s : trace) instants.insert(s.timestamp);
    std::vector<bool> before(rules.size(), false);
    for (const Instant now : instants) {
        for (const auto& s : trace)
            if (s.timestamp == now) history.push_back({s.name, {s.state, s.timestamp}});
        std::vector<bool> fired(rules.size(), false);
        for (;;) {
            std::map<std::string, Fact> latest;
            for (const auto& [name, f] : history) {
                const auto it = latest.find(name);
                if (it == latest.end() || f.t >= it->second.t) latest[name] = f;
            }
            bool more = false;
            for (std::size_t i = 0; i < rules.size(); ++i) {
                if (fired[i] || before[i]) continue;
                bool all = true;
                for (const auto& a : rules[i].body) all = all && brute_atom(a, latest, now, table);
                if (!all) continue;
                fired[i] = true;
                more = true;
                out.push_back({rules[i].head, now});
                history.push_back({rules[i].head, {true, now}});
            }
            if (!more) {
                for (std::size_t i = 0; i < rules.size(); ++i) {
                    bool all = true;
                    for (const auto& a : rules[i].body) all = all && brute_atom(a, latest, now, table);
                    before[i] = fired[i] || all;
                }
                break;
            }
        }
    }
    return out;
}

// Feeds the same trace through a real Node.
inline std::vector<Emission> engine_node(Node& node, const std::vector<Statement>& trace) {
    std::vector<Emission> out;
    std::size_t i = 0;
    while (i < trace.size()) {
        const Instant now = trace[i].timestamp;
        while (i < trace.size() && trace[i].timestamp == now) node.upsert(trace[i++]);
        for (const auto& e : node.evaluate(now).emissions) out.push_back({e.name, e.timestamp});
    }
    return out;
}

struct RandomNodeCase {
    std::vector<Rule> rules;
    std::vector<Statement> trace;
};

inline Atom random_atom(std::mt19937_64& rng, const std::vector<std::string>& names) {
    static const std::vector<Duration> deltas = {0ms, 1000ms, 2000ms, 5000ms};
    const auto& subject = pick(rng, names);
    switch (uniform(rng, 0, 4)) {
        case 0:
            return Atom::is(subject, chance(rng, 0.75));
        case 1:
            return Atom::held_for(subject, pick(rng, deltas));
        case 2:
            return Atom::occurred_after(subject, pick(rng, names), pick(rng, deltas));
        case 3:
            return Atom::in_interval(subject, kAllDayLabels[static_cast<std::size_t>(uniform(rng, 0, 3))]);
        default:
            return Atom::fresh_within(subject, pick(rng, deltas));
    }
}

// Up to 4 rules over 4 input names and the rule heads, up to 50 statements.
inline RandomNodeCase random_node_case(std::mt19937_64& rng) {
    const std::vector<std::string> inputs = {"a", "b", "c", "d"};
    RandomNodeCase c;
    const int nrules = uniform(rng, 1, 4);
    std::vector<std::string> names = inputs;
    for (int i = 0; i < nrules; ++i) names.push_back("h" + std::to_string(i));
    for (int i = 0; i < nrules; ++i) {
        Rule r;
        r.id = "r" + std::to_string(i);
        r.head = "h" + std::to_string(i);
        const int atoms = uniform(rng, 1, 3);
        for (int k = 0; k < atoms; ++k) r.body.push_back(random_atom(rng, chance(rng, 0.8) ? inputs : names));
        c.rules.push_back(r);
    }
    // Start close to an interval boundary now and then.
    static const std::vector<int> boundaries = {0, 6, 12, 18};
    std::int64_t t = chance(rng, 0.5) ? static_cast<std::int64_t>(pick(rng, boundaries)) * 3'600'000 +
                                            uniform(rng, 10, 60) * 1000 - 30'000
                                      : static_cast<std::int64_t>(uniform(rng, 0, 86'399)) * 1000;
    t = std::max<std::int64_t>(t, 0);
    static const std::vector<int> gaps = {0, 500, 1000, 1000, 2000, 5000};
    const int n = uniform(rng, 1, 50);
    for (int i = 0; i < n; ++i) {
        t += pick(rng, gaps);
        c.trace.push_back(Statement{pick(rng, inputs), chance(rng, 0.7), instant_ms(t), std::nullopt});
    }
    return c;
}

// ---------------------------------------------------------------------------
// Routing oracle: scan every edge.

inline std::map<std::string, std::vector<Statement>> brute_route(const NetworkGraph& g, const std::string& from,
                                                                 const std::vector<Statement>& emitted) {
    std::map<std::string, std::vector<Statement>> out;
    for (const auto& s : emitted)
        for (const auto& e : g.edges())
            if (e.from == from && std::count(e.carries.begin(), e.carries.end(), s.name) > 0)
                out[e.to].push_back(s);
    return out;
}

// ---------------------------------------------------------------------------
// Mini-traces for the home network. Readings sit on a whole-second grid so
// that f_s = f_o = 2 Hz sees every reading at its own instant and every
// freshness expiry before the next possible change.

struct MiniTrace {
    Scenario scenario;
    std::vector<ActivityModel> models;
    Duration dwell{0};
};

inline std::vector<ActivityModel> random_models(std::mt19937_64& rng) {
    std::vector<ActivityModel> out;
    while (out.empty())
        for (auto m : kAllActivityModels)
            if (chance(rng, 0.5)) out.push_back(m);
    return out;
}

inline Instant random_start(std::mt19937_64& rng) {
    static const std::vector<int> boundaries = {6, 12, 18, 24};
    if (chance(rng, 0.5))
        return instant_ms(static_cast<std::int64_t>(pick(rng, boundaries)) * 3'600'000 -
                          static_cast<std::int64_t>(uniform(rng, 0, 240)) * 1000);
    return instant_ms(static_cast<std::int64_t>(uniform(rng, 0, 86'000)) * 1000);
}

class TraceBuilder {
public:
    void add(int second, const std::string& sensor, double value) {
        if (!used_.insert({sensor, second}).second) return;
        steps_.push_back({std::chrono::seconds(second), sensor, value});
    }
    std::size_t size() const { return steps_.size(); }
    Scenario finish(Instant start, Duration tail) {
        Scenario sc;
        sc.start = start;
        std::sort(steps_.begin(), steps_.end(), [](const SensorReading& a, const SensorReading& b) {
            return a.offset != b.offset ? a.offset < b.offset : a.sensor < b.sensor;
        });
        // Per-sensor offsets are unique by construction.
        sc.steps = steps_;
        Duration last{0};
        for (const auto& s : steps_) last = std::max(last, s.offset);
        sc.duration = last + tail;
        sc.validate();
        return sc;
    }

private:
    std::vector<SensorReading> steps_;
    std::set<std::pair<std::string, int>> used_;
};

// A single occupant walking between rooms: furniture is used only inside
// its room and released by the time the occupant leaves, the TV is on only
// while in the living room, the bed PIR fires only while the bed is used.
inline MiniTrace plausible_trace(std::mt19937_64& rng) {
    static const std::vector<Duration> dwells = {2s, 5s, 10s, 60s};
    MiniTrace m;
    m.models = random_models(rng);
    m.dwell = pick(rng, dwells);
    const int d = static_cast<int>(m.dwell.count() / 1000);
    const auto cat = SensorCatalog::standard();
    const int budget = uniform(rng, 5, 100);

    TraceBuilder b;
    int t = 0;
    int room = -1;
    while (static_cast<int>(b.size()) < budget - 3) {
        // A stay that would push the trace past 100 readings is dropped whole,
        // so every furniture use keeps its release.
        const TraceBuilder before = b;
        const int t_before = t;
        const int room_before = room;
        int next = uniform(rng, 0, 3);
        if (next == room) next = (next + 1) % 4;
        room = next;
        const auto& pir = cat.room_pirs[static_cast<std::size_t>(room)];
        const int stay = uniform(rng, 1, 3 * d + 5);
        const int cadence = uniform(rng, 1, d + 2);
        b.add(t, pir.sensor, 1.0);
        for (int s = t + cadence; s < t + stay; s += cadence) b.add(s, pir.sensor, chance(rng, 0.9) ? 1.0 : 0.0);
        if (stay > 1 && chance(rng, 0.75)) {
            const int use = t + uniform(rng, 0, stay - 1);
            const int release = uniform(rng, use + 1, t + stay);
            if (pir.room == "Kitchen") {
                b.add(use, "C1", 1.0);
                b.add(release, "C1", 0.0);
            } else if (pir.room == "BathRoom") {
                b.add(use, "C3", 1.0);
                b.add(release, "C3", 0.0);
            } else if (pir.room == "LivingRoom") {
                b.add(use, cat.brightness_sensor, chance(rng, 0.5) ? 80.0 : 51.0);
                b.add(release, cat.brightness_sensor, chance(rng, 0.5) ? 10.0 : 50.0);
            } else {
                b.add(use, "C2", 1.0);
                const int bed_cadence = uniform(rng, 1, std::max(1, d));
                for (int s = use; s < release; s += bed_cadence) b.add(s, cat.bed_pir, 1.0);
                b.add(release, "C2", 0.0);
            }
        }
        t += stay;
        if (b.size() > 100) {
            b = before;
            t = t_before;
            room = room_before;
            if (b.size() > 0) break;
        }
    }
    m.scenario = b.finish(random_start(rng), m.dwell + std::chrono::seconds(uniform(rng, 1, 5)));
    return m;
}

// Readings of any sensor at any time; only physically meaningful for PAE.
inline MiniTrace arbitrary_trace(std::mt19937_64& rng) {
    static const std::vector<Duration> dwells = {2s, 5s, 10s};
    static const std::vector<std::string> sensors = {"PIR1", "PIR2", "PIR3", "PIR4", "PIR5",
                                                     "C1",   "C2",   "C3",   "brightness"};
    MiniTrace m;
    m.models = random_models(rng);
    m.dwell = pick(rng, dwells);
    const int d = static_cast<int>(m.dwell.count() / 1000);
    const int n = uniform(rng, 1, 100);
    const int span = uniform(rng, 5, 6 * d + 10);
    TraceBuilder b;
    for (int i = 0; i < n; ++i) {
        const auto& s = pick(rng, sensors);
        double v = chance(rng, 0.6) ? 1.0 : 0.0;
        if (s == "brightness") v = chance(rng, 0.5) ? 80.0 : 20.0;
        b.add(uniform(rng, 0, span), s, v);
    }
    m.scenario = b.finish(random_start(rng), m.dwell + std::chrono::seconds(uniform(rng, 1, 5)));
    return m;
}

inline SchedulerConfig grid_config() {
    SchedulerConfig cfg;
    cfg.reasoning_hz = 2.0;
    cfg.ingestion_hz = 2.0;
    return cfg;
}

// ---------------------------------------------------------------------------
// Random but grammatical source text with random layout and comments.
class SourceGen {
public:
    explicit SourceGen(std::mt19937_64& rng) : rng_(rng) {}

    std::string network() {
        out_.clear();
        emit("network");
        emit(ident("net"));
        emit("{");
        const int nodes = uniform(rng_, 0, 4);
        for (int i = 0; i < nodes; ++i) node();
        for (int i = uniform(rng_, 0, 3); i > 0; --i) {
            emit("edge");
            emit(ident("n"));
            emit("->");
            emit(ident("n"));
            emit("carries");
            list();
        }
        for (int i = uniform(rng_, 0, 3); i > 0; --i) {
            emit("listen");
            emit(ident("n"));
            emit(".", false);
            emit(ident("ev"), false);
            emit("activates");
            emit(ident("n"));
        }
        emit("}");
        return out_;
    }

private:
    void node() {
        emit("node");
        emit(ident("n"));
        emit("{");
        for (int i = uniform(rng_, 0, 6); i > 0; --i) {
            switch (uniform(rng_, 0, 2)) {
                case 0:
                    emit("rule");
                    emit(ident("r"));
                    emit(":");
                    conj();
                    emit("=>");
                    emit("emit");
                    emit(ident("H"));
                    break;
                case 1:
                    emit("event");
                    emit(ident("ev"));
                    emit("when");
                    conj();
                    break;
                default:
                    emit("map");
                    emit(ident("S"));
                    emit("->");
                    emit(ident("t"));
                    switch (uniform(rng_, 0, 3)) {
                        case 0:
                            emit("location");
                            emit("\"" + ident("Room") + "\"");
                            break;
                        case 1: emit("contact"); break;
                        case 2:
                            emit("threshold");
                            emit(chance(rng_, 0.5) ? std::to_string(uniform(rng_, 0, 100))
                                                   : std::to_string(uniform(rng_, 0, 9)) + "." +
                                                         std::to_string(uniform(rng_, 0, 99)));
                            break;
                        default: emit("motion"); break;
                    }
                    break;
            }
        }
        emit("}");
    }

    void conj() {
        for (int i = uniform(rng_, 1, 4); i > 0; --i) {
            atom();
            if (i > 1) emit("&");
        }
    }

    void atom() {
        static const std::vector<std::string> units = {"ms", "s", "m", "h"};
        static const std::vector<std::string> labels = {"Morning", "Afternoon", "Evening", "Night"};
        const auto dur = [&] { return std::to_string(uniform(rng_, 0, 5000)) + pick(rng_, units); };
        switch (uniform(rng_, 0, 4)) {
            case 0: call("is", {ident("x"), chance(rng_, 0.5) ? "true" : "false"}); break;
            case 1: call("heldFor", {ident("x"), dur()}); break;
            case 2: call("after", {ident("x"), ident("x"), dur()}); break;
            case 3: call("inInterval", {ident("x"), pick(rng_, labels)}); break;
            default: call("freshWithin", {ident("x"), dur()}); break;
        }
    }

    void call(const std::string& name, const std::vector<std::string>& args) {
        emit(name);
        emit("(", false);
        for (std::size_t i = 0; i < args.size(); ++i) {
            emit(args[i], i > 0);
            if (i + 1 < args.size()) emit(",", false);
        }
        emit(")", false);
    }

    void list() {
        for (int i = uniform(rng_, 1, 3); i > 0; --i) {
            emit(ident("x"));
            if (i > 1) emit(",", false);
        }
    }

    std::string ident(const std::string& prefix) { return prefix + std::to_string(uniform(rng_, 0, 5)); }

    void emit(const std::string& tok, bool space = true) {
        if (space || chance(rng_, 0.2)) {
            switch (uniform(rng_, 0, 5)) {
                case 0: out_ += "\n"; break;
                case 1: out_ += "  # comment " + std::to_string(uniform(rng_, 0, 9)) + "\n"; break;
                case 2: out_ += "\t"; break;
                default: out_ += " "; break;
            }
        }
        out_ += tok;
    }

    std::mt19937_64& rng_;
    std::string out_;
};

}  // namespace testsupport

#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctxnet/day_interval.hpp"
#include "ctxnet/statement.hpp"

namespace ctxnet {

enum class AtomKind { Is, HeldFor, OccurredAfter, InInterval, FreshWithin };

// One conjunct of a rule body or event query. Build through the factories,
// which set exactly the fields the kind uses; the rest keep their defaults.
struct Atom {
    AtomKind kind = AtomKind::Is;
    std::string subject;
    std::string object;          // OccurredAfter: the reference statement
    bool expected_state = true;  // Is
    Duration delta{0};           // HeldFor, OccurredAfter, FreshWithin
    DayLabel interval = DayLabel::Morning;  // InInterval

    static Atom is(std::string subject, bool state);
    static Atom held_for(std::string subject, Duration delta);
    static Atom occurred_after(std::string subject, std::string reference, Duration delta);
    static Atom in_interval(std::string subject, DayLabel label);
    static Atom fresh_within(std::string subject, Duration delta);

    // Statement names this atom reads, subject first.
    std::vector<std::string_view> names() const;

    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Rule {
    std::string id;
    std::vector<Atom> body;
    std::string head;

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct EventDef {
    std::string id;
    std::vector<Atom> query;

    friend bool operator==(const EventDef&, const EventDef&) = default;
};

enum class MapKind { Location, Contact, Threshold, Motion };

// Sensor-to-semantic mapping owned by a contextualizing node.
//   Location  room PIR True: target (isIn_<Room>) True on entering the room,
//             every other location target False, and motion_<Room> refreshed
//             on every fire.
//   Motion    True fire refreshes target on every fire.
//   Contact   target follows the contact state, stamped at each transition.
//   Threshold target follows (reading > threshold), stamped at transitions.
struct SensorMap {
    std::string sensor;
    std::string target;
    MapKind kind = MapKind::Contact;
    std::string room;        // Location
    double threshold = 0.0;  // Threshold

    std::string motion_target() const { return "motion_" + room; }
    // Statement names this map can write.
    std::vector<std::string> outputs() const;
    // Sensor-layer binarization of a raw reading.
    bool binarize(double reading) const {
        return kind == MapKind::Threshold ? reading > threshold : reading != 0.0;
    }

    friend bool operator==(const SensorMap&, const SensorMap&) = default;
};

// The loadable definition of a node: everything that is not runtime state.
struct NodeDef {
    std::string id;
    std::vector<SensorMap> maps;
    std::vector<EventDef> events;
    std::vector<Rule> rules;

    const SensorMap* find_map(std::string_view sensor) const;
    // Names produced inside the node (map outputs and rule heads).
    std::vector<std::string> local_names() const;

    friend bool operator==(const NodeDef&, const NodeDef&) = default;
};

using StatementMap = std::unordered_map<std::string, Statement>;

// Closed-world atom semantics; any atom over an absent name is false.
bool eval_atom(const Atom& atom, const StatementMap& store, Instant now,
               const IntervalTable& intervals);

bool eval_conjunction(const std::vector<Atom>& atoms, const StatementMap& store, Instant now,
                      const IntervalTable& intervals);

enum class UpsertOutcome { Inserted, Replaced, Unchanged, Discarded };

struct Evaluation {
    std::vector<Statement> emissions;
    std::vector<std::string> fired_events;
    std::chrono::nanoseconds elapsed{0};
};

// A knowledge node: latest-value statement store, rules, events and sensor
// maps. Not thread-safe; distinct nodes are independent.
class Node {
public:
    explicit Node(NodeDef def, IntervalTable intervals = IntervalTable::standard());

    const NodeDef& definition() const { return def_; }
    const std::string& id() const { return def_.id; }
    const IntervalTable& intervals() const { return intervals_; }
    const StatementMap& store() const { return store_; }

    // Latest-value replace. A statement strictly older than the stored one of
    // the same name is discarded and counted.
    UpsertOutcome upsert(const Statement& stmt);

    // Sensor-layer input: runs the matching sensor map, or upserts directly
    // when none matches. Resulting store changes are queued for routing.
    void ingest(const Statement& stmt);

    // Rising-edge rule emission (fixed point within the call) and
    // level-triggered events. Emissions are upserted and queued for routing.
    Evaluation evaluate(Instant now);

    // Clears the store, rule edge memory, sensor history and queues.
    void reset();

    std::vector<Statement> take_outbox();
    std::size_t discards() const { return discards_; }

private:
    void apply_map(const SensorMap& map, const Statement& reading);
    void local_write(Statement stmt);

    NodeDef def_;
    IntervalTable intervals_;
    StatementMap store_;
    std::vector<char> was_satisfied_;
    std::unordered_map<std::string, Instant> last_reading_;
    std::vector<Statement> outbox_;
    std::size_t discards_ = 0;
};

}  // namespace ctxnet

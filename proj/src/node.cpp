#include "ctxnet/node.hpp"

#include <algorithm>

namespace ctxnet {

Atom Atom::is(std::string subject, bool state) {
    Atom a;
    a.kind = AtomKind::Is;
    a.subject = std::move(subject);
    a.expected_state = state;
    return a;
}

Atom Atom::held_for(std::string subject, Duration delta) {
    if (delta.count() < 0) throw ModelError("delta", "negative duration in heldFor");
    Atom a;
    a.kind = AtomKind::HeldFor;
    a.subject = std::move(subject);
    a.delta = delta;
    return a;
}

Atom Atom::occurred_after(std::string subject, std::string reference, Duration delta) {
    if (delta.count() < 0) throw ModelError("delta", "negative duration in after");
    Atom a;
    a.kind = AtomKind::OccurredAfter;
    a.subject = std::move(subject);
    a.object = std::move(reference);
    a.delta = delta;
    return a;
}

Atom Atom::in_interval(std::string subject, DayLabel label) {
    Atom a;
    a.kind = AtomKind::InInterval;
    a.subject = std::move(subject);
    a.interval = label;
    return a;
}

Atom Atom::fresh_within(std::string subject, Duration delta) {
    if (delta.count() < 0) throw ModelError("delta", "negative duration in freshWithin");
    Atom a;
    a.kind = AtomKind::FreshWithin;
    a.subject = std::move(subject);
    a.delta = delta;
    return a;
}

std::vector<std::string_view> Atom::names() const {
    if (kind == AtomKind::OccurredAfter) return {subject, object};
    return {subject};
}

std::vector<std::string> SensorMap::outputs() const {
    if (kind == MapKind::Location) return {target, motion_target()};
    return {target};
}

const SensorMap* NodeDef::find_map(std::string_view sensor) const {
    for (const auto& m : maps)
        if (m.sensor == sensor) return &m;
    return nullptr;
}

std::vector<std::string> NodeDef::local_names() const {
    std::vector<std::string> out;
    for (const auto& m : maps)
        for (auto& n : m.outputs()) out.push_back(std::move(n));
    for (const auto& r : rules) out.push_back(r.head);
    return out;
}

bool eval_atom(const Atom& atom, const StatementMap& store, Instant now,
               const IntervalTable& intervals) {
    const auto it = store.find(atom.subject);
    if (it == store.end()) return false;
    const Statement& s = it->second;
    switch (atom.kind) {
        case AtomKind::Is:
            return s.state == atom.expected_state;
        case AtomKind::HeldFor:
            return s.state && now - s.timestamp >= atom.delta;
        case AtomKind::FreshWithin:
            return s.state && now - s.timestamp <= atom.delta;
        case AtomKind::InInterval:
            return intervals.classify(s.timestamp) == atom.interval;
        case AtomKind::OccurredAfter: {
            const auto ref = store.find(atom.object);
            if (ref == store.end()) return false;
            return s.state && ref->second.state &&
                   s.timestamp >= ref->second.timestamp + atom.delta;
        }
    }
    return false;
}

bool eval_conjunction(const std::vector<Atom>& atoms, const StatementMap& store, Instant now,
                      const IntervalTable& intervals) {
    return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) {
        return eval_atom(a, store, now, intervals);
    });
}

// ---------------------------------------------------------------------------

Node::Node(NodeDef def, IntervalTable intervals)
    : def_(std::move(def)), intervals_(std::move(intervals)), was_satisfied_(def_.rules.size(), 0) {}

UpsertOutcome Node::upsert(const Statement& stmt) {
    auto [it, inserted] = store_.try_emplace(stmt.name, stmt);
    if (inserted) return UpsertOutcome::Inserted;
    Statement& held = it->second;
    if (stmt.timestamp < held.timestamp) {
        ++discards_;
        return UpsertOutcome::Discarded;
    }
    if (held == stmt) return UpsertOutcome::Unchanged;
    held = stmt;
    return UpsertOutcome::Replaced;
}

void Node::local_write(Statement stmt) {
    const auto outcome = upsert(stmt);
    if (outcome == UpsertOutcome::Inserted || outcome == UpsertOutcome::Replaced)
        outbox_.push_back(std::move(stmt));
}

void Node::ingest(const Statement& stmt) {
    const SensorMap* map = def_.find_map(stmt.name);
    if (map == nullptr) {
        local_write(stmt);
        return;
    }
    auto [it, inserted] = last_reading_.try_emplace(stmt.name, stmt.timestamp);
    if (!inserted) {
        if (stmt.timestamp < it->second) {
            ++discards_;
            return;
        }
        it->second = stmt.timestamp;
    }
    apply_map(*map, stmt);
}

void Node::apply_map(const SensorMap& map, const Statement& reading) {
    const auto held_state = [&](const std::string& name) -> std::optional<bool> {
        const auto it = store_.find(name);
        if (it == store_.end()) return std::nullopt;
        return it->second.state;
    };
    const auto stamp = [&](const std::string& name, bool state) {
        local_write(Statement{name, state, reading.timestamp, reading.name});
    };

    switch (map.kind) {
        case MapKind::Location:
            // PIRs report activity pulses; a False reading carries no location.
            if (!reading.state) return;
            if (held_state(map.target) != true) {
                stamp(map.target, true);
                for (const auto& other : def_.maps) {
                    if (other.kind != MapKind::Location || other.target == map.target) continue;
                    if (held_state(other.target) != false) stamp(other.target, false);
                }
            }
            stamp(map.motion_target(), true);
            return;
        case MapKind::Motion:
            if (reading.state) stamp(map.target, true);
            return;
        case MapKind::Contact:
        case MapKind::Threshold:
            if (held_state(map.target) != reading.state) stamp(map.target, reading.state);
            return;
    }
}

Evaluation Node::evaluate(Instant now) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    Evaluation out;

    const std::size_t n = def_.rules.size();
    std::vector<char> emitted(n, 0);
    for (std::size_t pass = 0; pass < n; ++pass) {
        bool progressed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (emitted[i] || was_satisfied_[i]) continue;
            const Rule& rule = def_.rules[i];
            if (!eval_conjunction(rule.body, store_, now, intervals_)) continue;
            emitted[i] = 1;
            progressed = true;
            Statement head{rule.head, true, now, def_.id};
            out.emissions.push_back(head);
            local_write(std::move(head));
        }
        if (!progressed) break;
    }
    for (std::size_t i = 0; i < n; ++i)
        was_satisfied_[i] = emitted[i] || eval_conjunction(def_.rules[i].body, store_, now, intervals_);

    for (const auto& ev : def_.events)
        if (eval_conjunction(ev.query, store_, now, intervals_)) out.fired_events.push_back(ev.id);

    out.elapsed = std::max<std::chrono::nanoseconds>(clock::now() - started,
                                                     std::chrono::nanoseconds(1));
    return out;
}

void Node::reset() {
    store_.clear();
    std::fill(was_satisfied_.begin(), was_satisfied_.end(), 0);
    last_reading_.clear();
    outbox_.clear();
    discards_ = 0;
}

std::vector<Statement> Node::take_outbox() {
    std::vector<Statement> out;
    out.swap(outbox_);
    return out;
}

}  // namespace ctxnet

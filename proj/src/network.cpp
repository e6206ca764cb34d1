#include "ctxnet/network.hpp"

#include <algorithm>

#include "json.hpp"

namespace ctxnet {

std::string_view to_string(Mode mode) { return mode == Mode::CAE ? "CAE" : "PAE"; }

bool Edge::carries_name(std::string_view name) const {
    return std::find(carries.begin(), carries.end(), name) != carries.end();
}

std::chrono::nanoseconds TickReport::reasoning_time() const {
    std::chrono::nanoseconds sum{0};
    for (const auto& e : evaluated) sum += e.elapsed;
    return sum;
}

std::vector<std::string> TickReport::evaluated_ids() const {
    std::vector<std::string> ids;
    for (const auto& e : evaluated) ids.push_back(e.node);
    return ids;
}

std::string to_json_line(const TickReport& report) {
    using ojson = nlohmann::ordered_json;
    ojson j;
    j["tick"] = report.tick_index;
    j["t_ms"] = to_ms(report.now);
    j["evaluated"] = ojson::array();
    for (const auto& e : report.evaluated) {
        ojson row;
        row["node"] = e.node;
        row["us"] = std::chrono::duration_cast<std::chrono::microseconds>(e.elapsed).count();
        j["evaluated"].push_back(std::move(row));
    }
    j["emissions"] = ojson::array();
    for (const auto& s : report.emissions) j["emissions"].push_back(ojson::parse(to_json_line(s)));
    j["events"] = ojson::array();
    for (const auto& [node, ev] : report.fired_events) j["events"].push_back({node, ev});
    j["discards"] = report.discards;
    j["overrun"] = report.overrun;
    return j.dump();
}

// ---------------------------------------------------------------------------

NetworkGraph::NetworkGraph(std::string name, std::vector<Node> nodes, std::vector<Edge> edges,
                           std::vector<Listener> listeners, Mode mode)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      listeners_(std::move(listeners)),
      mode_(mode) {
    rebuild_index();
}

void NetworkGraph::rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_.try_emplace(nodes_[i].id(), i);

    inbound_names_.clear();
    if (nodes_.empty()) return;
    const NodeDef& p = nodes_.front().definition();
    for (const auto& m : p.maps) inbound_names_.insert(m.sensor);
    for (const auto& n : p.local_names()) inbound_names_.insert(n);
    for (const auto& r : p.rules)
        for (const auto& a : r.body)
            for (auto n : a.names()) inbound_names_.emplace(n);
    for (const auto& ev : p.events)
        for (const auto& a : ev.query)
            for (auto n : a.names()) inbound_names_.emplace(n);
    for (const auto& e : edges_)
        if (e.from == p.id)
            for (const auto& n : e.carries) inbound_names_.insert(n);
}

Node* NetworkGraph::find(std::string_view id) {
    const auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

const Node* NetworkGraph::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

bool NetworkGraph::is_activity(std::string_view id) const {
    return !nodes_.empty() && nodes_.front().id() != id && find(id) != nullptr;
}

bool NetworkGraph::accepts_inbound(std::string_view name) const {
    return inbound_names_.find(name) != inbound_names_.end();
}

std::size_t NetworkGraph::total_discards() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) n += node.discards();
    return n;
}

std::vector<GraphIssue> NetworkGraph::validate() const {
    std::vector<GraphIssue> issues;
    std::set<std::string> seen;
    for (const auto& node : nodes_)
        if (!seen.insert(node.id()).second)
            issues.push_back({"duplicate node '" + node.id() + "'", "node " + node.id()});

    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        const std::string item = "edge " + std::to_string(i);
        if (!find(e.from)) issues.push_back({"unknown node '" + e.from + "'", item});
        if (!find(e.to)) issues.push_back({"unknown node '" + e.to + "'", item});
        if (e.from == e.to) issues.push_back({"self-loop edge on '" + e.from + "'", item});
        if (e.carries.empty()) issues.push_back({"edge carries no statements", item});
    }

    for (std::size_t i = 0; i < listeners_.size(); ++i) {
        const Listener& l = listeners_[i];
        const std::string item = "listener " + std::to_string(i);
        const Node* src = find(l.source_node);
        if (!src) {
            issues.push_back({"unknown node '" + l.source_node + "'", item});
        } else {
            const auto& evs = src->definition().events;
            const bool known = std::any_of(evs.begin(), evs.end(),
                                           [&](const EventDef& ev) { return ev.id == l.event; });
            if (!known)
                issues.push_back({"unknown event '" + l.source_node + "." + l.event + "'", item});
        }
        if (!find(l.target)) issues.push_back({"unknown node '" + l.target + "'", item});
    }

    // Name provenance: every name a rule or event reads is produced locally
    // or arrives over an inbound edge.
    for (const auto& node : nodes_) {
        const NodeDef& def = node.definition();
        std::set<std::string, std::less<>> available;
        for (auto& n : def.local_names()) available.insert(std::move(n));
        for (const auto& e : edges_)
            if (e.to == def.id) available.insert(e.carries.begin(), e.carries.end());
        const auto check = [&](const std::vector<Atom>& atoms, const std::string& item) {
            for (const auto& a : atoms) {
                if (a.delta.count() < 0) issues.push_back({"negative duration", item});
                for (auto n : a.names())
                    if (available.find(n) == available.end())
                        issues.push_back({"name '" + std::string(n) +
                                              "' is neither produced locally nor carried by an inbound edge",
                                          item});
            }
        };
        for (const auto& r : def.rules) {
            const std::string item = "node " + def.id + " rule " + r.id;
            if (r.body.empty()) issues.push_back({"rule body is empty", item});
            check(r.body, item);
        }
        for (const auto& ev : def.events) {
            const std::string item = "node " + def.id + " event " + ev.id;
            if (ev.query.empty()) issues.push_back({"event query is empty", item});
            check(ev.query, item);
        }
    }
    return issues;
}

std::map<std::string, std::vector<Statement>> route(const NetworkGraph& graph, std::string_view from,
                                                    std::span<const Statement> emitted) {
    std::map<std::string, std::vector<Statement>> out;
    for (const auto& stmt : emitted)
        for (const auto& e : graph.edges())
            if (e.from == from && e.carries_name(stmt.name)) out[e.to].push_back(stmt);
    return out;
}

TickReport NetworkGraph::tick(Instant now, std::span<const Statement> inbound) {
    TickReport report;
    report.tick_index = next_tick_++;
    report.now = now;
    if (nodes_.empty()) return report;
    const std::size_t discards_before = total_discards();

    std::vector<Statement> ordered(inbound.begin(), inbound.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const Statement& a, const Statement& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.name < b.name;
    });
    for (const auto& s : ordered)
        if (!accepts_inbound(s.name))
            throw TickError(s, "inbound statement '" + s.name + "' has no addressee in '" +
                                   nodes_.front().id() + "'");

    const auto deliver = [this](const std::map<std::string, std::vector<Statement>>& batches) {
        for (const auto& [target, stmts] : batches) {
            Node* node = find(target);
            for (const auto& s : stmts) node->upsert(s);
        }
    };

    Node& place = nodes_.front();
    for (const auto& s : ordered) place.ingest(s);
    auto ctx = place.evaluate(now);
    report.evaluated.push_back({place.id(), ctx.elapsed});
    for (auto& ev : ctx.fired_events) report.fired_events.emplace_back(place.id(), ev);
    report.emissions = std::move(ctx.emissions);
    {
        const auto out = place.take_outbox();
        deliver(route(*this, place.id(), out));
    }

    std::vector<std::string> targets;
    if (mode_ == Mode::PAE) {
        for (std::size_t i = 1; i < nodes_.size(); ++i) targets.push_back(nodes_[i].id());
    } else {
        for (const auto& l : listeners_) {
            const bool fired = std::any_of(report.fired_events.begin(), report.fired_events.end(),
                                           [&](const auto& fe) {
                                               return fe.first == l.source_node && fe.second == l.event;
                                           });
            if (fired && l.target != place.id()) targets.push_back(l.target);
        }
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    std::vector<std::map<std::string, std::vector<Statement>>> deferred;
    for (const auto& id : targets) {
        Node* node = find(id);
        auto r = node->evaluate(now);
        report.evaluated.push_back({id, r.elapsed});
        for (auto& ev : r.fired_events) report.fired_events.emplace_back(id, std::move(ev));
        for (auto& s : r.emissions) report.emissions.push_back(std::move(s));
        const auto out = node->take_outbox();
        deferred.push_back(route(*this, id, out));
    }
    for (const auto& batch : deferred) deliver(batch);

    report.discards = total_discards() - discards_before;
    return report;
}

void NetworkGraph::reset() {
    for (auto& n : nodes_) n.reset();
    next_tick_ = 0;
}

NetworkGraph NetworkGraph::restricted(std::size_t activity_count) const {
    std::vector<Node> kept;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < nodes_.size() && i <= activity_count; ++i) {
        kept.emplace_back(nodes_[i].definition(), nodes_[i].intervals());
        ids.insert(nodes_[i].id());
    }
    std::vector<Edge> edges;
    for (const auto& e : edges_)
        if (ids.count(e.from) && ids.count(e.to)) edges.push_back(e);
    std::vector<Listener> listeners;
    for (const auto& l : listeners_)
        if (ids.count(l.source_node) && ids.count(l.target)) listeners.push_back(l);
    return NetworkGraph(name_, std::move(kept), std::move(edges), std::move(listeners), mode_);
}

bool NetworkGraph::same_definition(const NetworkGraph& other) const {
    if (name_ != other.name_ || mode_ != other.mode_ || edges_ != other.edges_ ||
        listeners_ != other.listeners_ || nodes_.size() != other.nodes_.size())
        return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].definition() != other.nodes_[i].definition() ||
            !(nodes_[i].intervals() == other.nodes_[i].intervals()))
            return false;
    return true;
}

}  // namespace ctxnet

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctxnet/node.hpp"

namespace ctxnet {

// CAE evaluates an activity node only on ticks where one of its listened
// events fired; PAE evaluates every activity node on every tick.
enum class Mode { CAE, PAE };

std::string_view to_string(Mode mode);

// Directed statement channel; only names in `carries` travel along it.
struct Edge {
    std::string from;
    std::string to;
    std::vector<std::string> carries;

    bool carries_name(std::string_view name) const;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Listener {
    std::string source_node;
    std::string event;
    std::string target;

    friend bool operator==(const Listener&, const Listener&) = default;
};

struct NodeTiming {
    std::string node;
    std::chrono::nanoseconds elapsed{0};
};

struct TickReport {
    std::uint64_t tick_index = 0;
    Instant now{};
    std::vector<NodeTiming> evaluated;
    std::vector<Statement> emissions;
    std::vector<std::pair<std::string, std::string>> fired_events;
    std::size_t discards = 0;
    // Filled by the scheduler: wall time of the whole tick and whether it
    // exceeded the reasoning period.
    std::chrono::nanoseconds wall{0};
    bool overrun = false;

    std::chrono::nanoseconds reasoning_time() const;
    std::vector<std::string> evaluated_ids() const;
};

// {"tick":..,"t_ms":..,"evaluated":[{"node":..,"us":..}],"emissions":[..],
//  "events":[[node,event]],"discards":..,"overrun":..}
std::string to_json_line(const TickReport& report);

class TickError : public std::runtime_error {
public:
    TickError(Statement stmt, const std::string& what)
        : std::runtime_error(what), statement_(std::move(stmt)) {}
    const Statement& statement() const noexcept { return statement_; }

private:
    Statement statement_;
};

// A validation finding. `item` locates it: "node <id>", "edge <n>",
// "listener <n>", or "node <id> rule <rule>" / "node <id> event <event>".
struct GraphIssue {
    std::string message;
    std::string item;

    friend bool operator==(const GraphIssue&, const GraphIssue&) = default;
};

// G = {N, E} plus listeners. The first node is the contextualizer: it
// receives sensor-layer input and runs first on every tick.
class NetworkGraph {
public:
    NetworkGraph() = default;
    NetworkGraph(std::string name, std::vector<Node> nodes, std::vector<Edge> edges,
                 std::vector<Listener> listeners, Mode mode = Mode::CAE);

    const std::string& name() const { return name_; }
    Mode mode() const { return mode_; }
    void set_mode(Mode mode) { mode_ = mode; }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Listener>& listeners() const { return listeners_; }

    Node* find(std::string_view id);
    const Node* find(std::string_view id) const;
    const Node& contextualizer() const { return nodes_.front(); }
    bool is_activity(std::string_view id) const;

    // Empty result means loadable.
    std::vector<GraphIssue> validate() const;

    // One reasoning tick: ingest into the contextualizer, evaluate it, route,
    // evaluate the selected activity nodes in ascending id order, route their
    // emissions after all of them ran.
    TickReport tick(Instant now, std::span<const Statement> inbound);

    // Returns every node to its loaded state and restarts tick numbering.
    void reset();

    // Contextualizer plus the first `activity_count` activity nodes in
    // declaration order; edges and listeners touching dropped nodes go too.
    NetworkGraph restricted(std::size_t activity_count) const;

    // Definition equality: same nodes, edges, listeners, intervals and mode.
    bool same_definition(const NetworkGraph& other) const;

private:
    void rebuild_index();
    bool accepts_inbound(std::string_view name) const;
    std::size_t total_discards() const;

    std::string name_;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<Listener> listeners_;
    Mode mode_ = Mode::CAE;
    std::unordered_map<std::string, std::size_t> index_;
    std::set<std::string, std::less<>> inbound_names_;
    std::uint64_t next_tick_ = 0;
};

// Statements from `from` delivered to each one-hop target whose edge filter
// carries their name, keyed by target id. Unmatched statements go nowhere.
std::map<std::string, std::vector<Statement>> route(const NetworkGraph& graph, std::string_view from,
                                                    std::span<const Statement> emitted);

}  // namespace ctxnet

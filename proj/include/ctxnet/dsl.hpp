#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxnet/network.hpp"

// Text format (.ctxnet) for networks:
//
//   network home {
//     node place {
//       map PIR1 -> isIn_Kitchen location "Kitchen"
//       event humanIn_Kitchen when is(isIn_Kitchen, true)
//     }
//     node A1 {
//       rule breakfast: heldFor(isIn_Kitchen, 60s) & ... => emit MakingBreakfast
//     }
//     edge place -> A1 carries isIn_Kitchen, kitchenCabinetUsed
//     listen place.humanIn_Kitchen activates A1
//   }
//
// `#` starts a line comment. Durations carry a unit: ms, s, m or h.
namespace ctxnet::dsl {

// Positions do not take part in structural equality of the AST.
struct SourceLoc {
    int line = 0;
    int col = 0;

    friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

struct Diagnostic {
    SourceLoc loc;
    std::string message;

    // "<file>:<line>:<col>: <message>"
    std::string format(std::string_view file) const;
};

struct DurationLit {
    std::string digits;
    std::string unit;

    friend bool operator==(const DurationLit&, const DurationLit&) = default;
};

struct AtomAst {
    AtomKind kind = AtomKind::Is;
    std::string subject;
    std::string object;
    bool state = true;
    DurationLit duration;
    std::string interval;
    SourceLoc loc;

    friend bool operator==(const AtomAst&, const AtomAst&) = default;
};

struct RuleAst {
    std::string id;
    std::vector<AtomAst> body;
    std::string head;
    SourceLoc loc;

    friend bool operator==(const RuleAst&, const RuleAst&) = default;
};

struct EventAst {
    std::string id;
    std::vector<AtomAst> query;
    SourceLoc loc;

    friend bool operator==(const EventAst&, const EventAst&) = default;
};

struct MapAst {
    std::string sensor;
    std::string target;
    MapKind kind = MapKind::Contact;
    std::string room;       // location
    std::string threshold;  // threshold, as written
    SourceLoc loc;

    friend bool operator==(const MapAst&, const MapAst&) = default;
};

struct NodeAst {
    std::string id;
    std::vector<MapAst> maps;
    std::vector<EventAst> events;
    std::vector<RuleAst> rules;
    SourceLoc loc;

    friend bool operator==(const NodeAst&, const NodeAst&) = default;
};

struct EdgeAst {
    std::string from;
    std::string to;
    std::vector<std::string> carries;
    SourceLoc loc;

    friend bool operator==(const EdgeAst&, const EdgeAst&) = default;
};

struct ListenerAst {
    std::string source;
    std::string event;
    std::string target;
    SourceLoc loc;

    friend bool operator==(const ListenerAst&, const ListenerAst&) = default;
};

struct NetworkAst {
    std::string name;
    std::vector<NodeAst> nodes;
    std::vector<EdgeAst> edges;
    std::vector<ListenerAst> listeners;
    SourceLoc loc;

    friend bool operator==(const NetworkAst&, const NetworkAst&) = default;
};

struct ParseResult {
    std::optional<NetworkAst> ast;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return ast.has_value(); }
};

// Either a complete AST or at least one diagnostic; never both.
ParseResult parse(std::string_view source);

// Canonical text: maps, events, then rules inside each node; nodes, edges,
// then listeners at network level.
std::string serialize(const NetworkAst& ast);

struct ResolveResult {
    std::optional<NetworkGraph> graph;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return graph.has_value(); }
};

// Builds the graph, normalizing durations to milliseconds, and reports
// duplicate ids, unknown interval labels, duration overflow and every
// graph validation issue.
ResolveResult resolve(const NetworkAst& ast, const IntervalTable& intervals = IntervalTable::standard(),
                      Mode mode = Mode::CAE);

// parse followed by resolve.
ResolveResult load(std::string_view source, const IntervalTable& intervals = IntervalTable::standard(),
                   Mode mode = Mode::CAE);

// AST whose resolution is a graph with the same definition.
NetworkAst to_ast(const NetworkGraph& graph);

}  // namespace ctxnet::dsl

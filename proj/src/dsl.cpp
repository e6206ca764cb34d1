#include "ctxnet/dsl.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace ctxnet::dsl {

std::string Diagnostic::format(std::string_view file) const {
    std::ostringstream os;
    os << file << ':' << loc.line << ':' << loc.col << ": " << message;
    return os.str();
}

namespace {

enum class Tok { Ident, Number, Duration, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;  // identifier, punctuation, number digits, string body
    std::string unit;  // Duration only
    SourceLoc loc;
};

// Thrown inside the parser and converted to a single diagnostic.
struct SyntaxError {
    SourceLoc loc;
    std::string message;
};

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.loc = {line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back(std::move(t));
                return out;
            }
            const char c = src_[pos_];
            if (ident_start(c)) {
                t.kind = Tok::Ident;
                while (pos_ < src_.size() && ident_char(src_[pos_])) t.text += take();
            } else if (digit(c)) {
                lex_number(t);
            } else if (c == '"') {
                lex_string(t);
            } else if (c == '=' || c == '-') {
                take();
                if (pos_ >= src_.size() || src_[pos_] != '>')
                    throw SyntaxError{t.loc, std::string("unexpected character '") + c + "'"};
                take();
                t.kind = Tok::Punct;
                t.text = std::string(1, c) + ">";
            } else if (c == '{' || c == '}' || c == ':' || c == '&' || c == ',' || c == '.' || c == '(' ||
                       c == ')') {
                t.kind = Tok::Punct;
                t.text = std::string(1, take());
            } else {
                const auto byte = static_cast<unsigned char>(c);
                if (byte < 0x20 || byte >= 0x7f) {
                    char buf[16];
                    std::snprintf(buf, sizeof buf, "0x%02X", byte);
                    throw SyntaxError{t.loc, std::string("unexpected byte ") + buf};
                }
                throw SyntaxError{t.loc, std::string("unexpected character '") + c + "'"};
            }
            out.push_back(std::move(t));
        }
    }

private:
    char take() {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                take();
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') take();
            } else {
                break;
            }
        }
    }

    void lex_number(Token& t) {
        while (pos_ < src_.size() && digit(src_[pos_])) t.text += take();
        bool fractional = false;
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' && digit(src_[pos_ + 1])) {
            fractional = true;
            t.text += take();
            while (pos_ < src_.size() && digit(src_[pos_])) t.text += take();
        }
        if (pos_ < src_.size() && ident_start(src_[pos_])) {
            const SourceLoc unit_loc{line_, col_};
            while (pos_ < src_.size() && ident_char(src_[pos_])) t.unit += take();
            if (t.unit != "ms" && t.unit != "s" && t.unit != "m" && t.unit != "h")
                throw SyntaxError{unit_loc, "unknown duration unit '" + t.unit + "' (use ms, s, m or h)"};
            if (fractional) throw SyntaxError{t.loc, "duration must be a whole number"};
            t.kind = Tok::Duration;
            return;
        }
        t.kind = Tok::Number;
    }

    void lex_string(Token& t) {
        take();
        t.kind = Tok::String;
        for (;;) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') throw SyntaxError{t.loc, "unterminated string"};
            const char c = take();
            if (c == '"') return;
            if (c == '\\') {
                if (pos_ >= src_.size()) throw SyntaxError{t.loc, "unterminated string"};
                const char e = take();
                if (e != '"' && e != '\\') throw SyntaxError{t.loc, "unknown escape in string"};
                t.text += e;
            } else {
                t.text += c;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::String: return "string";
        case Tok::Number: return "number '" + t.text + "'";
        case Tok::Duration: return "duration '" + t.text + t.unit + "'";
        default: return "'" + t.text + "'";
    }
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    NetworkAst network() {
        NetworkAst net;
        net.loc = peek().loc;
        keyword("network");
        net.name = ident("network name");
        punct("{");
        while (!is_punct("}")) {
            const Token& t = peek();
            if (is_word("node"))
                net.nodes.push_back(node());
            else if (is_word("edge"))
                net.edges.push_back(edge());
            else if (is_word("listen"))
                net.listeners.push_back(listener());
            else
                fail(t, "expected 'node', 'edge' or 'listen', found " + describe(t));
        }
        punct("}");
        if (peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()) + " after network");
        return net;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const Token& at, std::string message) {
        throw SyntaxError{at.loc, std::move(message)};
    }

    bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
    bool is_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

    void punct(std::string_view p) {
        if (!is_punct(p)) fail(peek(), "expected '" + std::string(p) + "', found " + describe(peek()));
        next();
    }

    void keyword(std::string_view w) {
        if (!is_word(w)) fail(peek(), "expected '" + std::string(w) + "', found " + describe(peek()));
        next();
    }

    std::string ident(std::string_view what) {
        if (peek().kind != Tok::Ident)
            fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
        return next().text;
    }

    NodeAst node() {
        NodeAst n;
        n.loc = peek().loc;
        keyword("node");
        n.id = ident("node id");
        punct("{");
        while (!is_punct("}")) {
            if (is_word("rule"))
                n.rules.push_back(rule());
            else if (is_word("event"))
                n.events.push_back(event());
            else if (is_word("map"))
                n.maps.push_back(map());
            else
                fail(peek(), "expected 'rule', 'event', 'map' or '}', found " + describe(peek()));
        }
        punct("}");
        return n;
    }

    std::vector<AtomAst> conjunction() {
        std::vector<AtomAst> atoms;
        atoms.push_back(atom());
        while (is_punct("&")) {
            next();
            atoms.push_back(atom());
        }
        return atoms;
    }

    RuleAst rule() {
        RuleAst r;
        r.loc = peek().loc;
        keyword("rule");
        r.id = ident("rule id");
        punct(":");
        r.body = conjunction();
        punct("=>");
        keyword("emit");
        r.head = ident("emitted statement name");
        return r;
    }

    EventAst event() {
        EventAst e;
        e.loc = peek().loc;
        keyword("event");
        e.id = ident("event id");
        keyword("when");
        e.query = conjunction();
        return e;
    }

    MapAst map() {
        MapAst m;
        m.loc = peek().loc;
        keyword("map");
        m.sensor = ident("sensor id");
        punct("->");
        m.target = ident("target statement name");
        const Token& kind = peek();
        if (is_word("location")) {
            next();
            m.kind = MapKind::Location;
            if (peek().kind != Tok::String) fail(peek(), "expected room string after 'location'");
            m.room = next().text;
        } else if (is_word("contact")) {
            next();
            m.kind = MapKind::Contact;
        } else if (is_word("motion")) {
            next();
            m.kind = MapKind::Motion;
        } else if (is_word("threshold")) {
            next();
            m.kind = MapKind::Threshold;
            if (peek().kind != Tok::Number) fail(peek(), "expected number after 'threshold'");
            m.threshold = next().text;
        } else {
            fail(kind, "expected 'location', 'contact', 'threshold' or 'motion', found " + describe(kind));
        }
        return m;
    }

    DurationLit duration_after_comma() {
        if (!is_punct(",") || toks_[pos_ + 1].kind != Tok::Duration)
            fail(peek(), "expected ',' and duration");
        next();
        const Token& d = next();
        return {d.text, d.unit};
    }

    std::string ident_after_comma(std::string_view what) {
        if (!is_punct(",") || toks_[pos_ + 1].kind != Tok::Ident)
            fail(peek(), "expected ',' and " + std::string(what));
        next();
        return next().text;
    }

    AtomAst atom() {
        AtomAst a;
        a.loc = peek().loc;
        if (peek().kind != Tok::Ident) fail(peek(), "expected atom, found " + describe(peek()));
        const std::string name = next().text;
        if (name != "is" && name != "heldFor" && name != "after" && name != "inInterval" &&
            name != "freshWithin")
            throw SyntaxError{a.loc, "unknown atom '" + name +
                                         "' (expected is, heldFor, after, inInterval or freshWithin)"};
        punct("(");
        a.subject = ident("statement name");
        if (name == "is") {
            a.kind = AtomKind::Is;
            const std::string b = ident_after_comma("boolean");
            if (b != "true" && b != "false") fail(toks_[pos_ - 1], "expected 'true' or 'false'");
            a.state = b == "true";
        } else if (name == "heldFor") {
            a.kind = AtomKind::HeldFor;
            a.duration = duration_after_comma();
        } else if (name == "after") {
            a.kind = AtomKind::OccurredAfter;
            a.object = ident_after_comma("statement name");
            a.duration = duration_after_comma();
        } else if (name == "inInterval") {
            a.kind = AtomKind::InInterval;
            a.interval = ident_after_comma("interval label");
        } else if (name == "freshWithin") {
            a.kind = AtomKind::FreshWithin;
            a.duration = duration_after_comma();
        }
        punct(")");
        return a;
    }

    EdgeAst edge() {
        EdgeAst e;
        e.loc = peek().loc;
        keyword("edge");
        e.from = ident("source node id");
        punct("->");
        e.to = ident("target node id");
        keyword("carries");
        e.carries.push_back(ident("statement name"));
        while (is_punct(",")) {
            next();
            e.carries.push_back(ident("statement name"));
        }
        return e;
    }

    ListenerAst listener() {
        ListenerAst l;
        l.loc = peek().loc;
        keyword("listen");
        l.source = ident("node id");
        punct(".");
        l.event = ident("event id");
        keyword("activates");
        l.target = ident("node id");
        return l;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------

std::string atom_text(const AtomAst& a) {
    const auto dur = [](const DurationLit& d) { return d.digits + d.unit; };
    switch (a.kind) {
        case AtomKind::Is: return "is(" + a.subject + ", " + (a.state ? "true" : "false") + ")";
        case AtomKind::HeldFor: return "heldFor(" + a.subject + ", " + dur(a.duration) + ")";
        case AtomKind::OccurredAfter:
            return "after(" + a.subject + ", " + a.object + ", " + dur(a.duration) + ")";
        case AtomKind::InInterval: return "inInterval(" + a.subject + ", " + a.interval + ")";
        case AtomKind::FreshWithin: return "freshWithin(" + a.subject + ", " + dur(a.duration) + ")";
    }
    return "";
}

std::string conjunction_text(const std::vector<AtomAst>& atoms) {
    std::string out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (i) out += " & ";
        out += atom_text(atoms[i]);
    }
    return out;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::optional<std::int64_t> duration_ms(const DurationLit& d) {
    std::uint64_t value = 0;
    const auto* first = d.digits.data();
    const auto* last = first + d.digits.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    std::uint64_t factor = 1;
    if (d.unit == "s") factor = 1000;
    else if (d.unit == "m") factor = 60'000;
    else if (d.unit == "h") factor = 3'600'000;
    constexpr auto limit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (value > limit / factor) return std::nullopt;
    return static_cast<std::int64_t>(value * factor);
}

DurationLit duration_lit(Duration d) {
    const auto ms = d.count();
    if (ms % 1000 == 0) return {std::to_string(ms / 1000), "s"};
    return {std::to_string(ms), "ms"};
}

std::string number_text(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

ParseResult parse(std::string_view source) {
    ParseResult result;
    try {
        Parser p(Lexer(source).run());
        result.ast = p.network();
    } catch (const SyntaxError& e) {
        result.diagnostics.push_back({e.loc, e.message});
    }
    return result;
}

std::string serialize(const NetworkAst& ast) {
    std::ostringstream os;
    os << "network " << ast.name << " {\n";
    for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
        const auto& n = ast.nodes[i];
        if (i) os << '\n';
        os << "  node " << n.id << " {\n";
        for (const auto& m : n.maps) {
            os << "    map " << m.sensor << " -> " << m.target << ' ';
            switch (m.kind) {
                case MapKind::Location: os << "location " << quote(m.room); break;
                case MapKind::Contact: os << "contact"; break;
                case MapKind::Motion: os << "motion"; break;
                case MapKind::Threshold: os << "threshold " << m.threshold; break;
            }
            os << '\n';
        }
        for (const auto& e : n.events) os << "    event " << e.id << " when " << conjunction_text(e.query) << '\n';
        for (const auto& r : n.rules)
            os << "    rule " << r.id << ": " << conjunction_text(r.body) << " => emit " << r.head << '\n';
        os << "  }\n";
    }
    if (!ast.edges.empty()) {
        if (!ast.nodes.empty()) os << '\n';
        for (const auto& e : ast.edges) {
            os << "  edge " << e.from << " -> " << e.to << " carries ";
            for (std::size_t i = 0; i < e.carries.size(); ++i) os << (i ? ", " : "") << e.carries[i];
            os << '\n';
        }
    }
    if (!ast.listeners.empty()) {
        if (!ast.nodes.empty() || !ast.edges.empty()) os << '\n';
        for (const auto& l : ast.listeners)
            os << "  listen " << l.source << '.' << l.event << " activates " << l.target << '\n';
    }
    os << "}\n";
    return os.str();
}

ResolveResult resolve(const NetworkAst& ast, const IntervalTable& intervals, Mode mode) {
    ResolveResult result;
    auto& diags = result.diagnostics;
    std::map<std::string, SourceLoc> item_loc;

    std::set<std::string> node_ids;
    std::vector<Node> nodes;
    for (const auto& n : ast.nodes) {
        if (!node_ids.insert(n.id).second) {
            diags.push_back({n.loc, "duplicate node '" + n.id + "'"});
            continue;
        }
        item_loc["node " + n.id] = n.loc;
        NodeDef def;
        def.id = n.id;

        const auto atoms = [&](const std::vector<AtomAst>& in) {
            std::vector<Atom> out;
            for (const auto& a : in) {
                Atom atom;
                atom.kind = a.kind;
                atom.subject = a.subject;
                switch (a.kind) {
                    case AtomKind::Is: atom.expected_state = a.state; break;
                    case AtomKind::InInterval:
                        if (auto label = parse_day_label(a.interval))
                            atom.interval = *label;
                        else
                            diags.push_back({a.loc, "unknown interval label '" + a.interval +
                                                        "' (expected Morning, Afternoon, Evening or Night)"});
                        break;
                    case AtomKind::OccurredAfter:
                        atom.object = a.object;
                        [[fallthrough]];
                    case AtomKind::HeldFor:
                    case AtomKind::FreshWithin:
                        if (auto ms = duration_ms(a.duration))
                            atom.delta = Duration(*ms);
                        else
                            diags.push_back({a.loc, "duration overflow in '" + a.duration.digits +
                                                        a.duration.unit + "'"});
                        break;
                }
                out.push_back(std::move(atom));
            }
            return out;
        };

        std::set<std::string> sensors;
        for (const auto& m : n.maps) {
            if (!sensors.insert(m.sensor).second) {
                diags.push_back({m.loc, "duplicate map for sensor '" + m.sensor + "'"});
                continue;
            }
            SensorMap sm;
            sm.sensor = m.sensor;
            sm.target = m.target;
            sm.kind = m.kind;
            sm.room = m.room;
            if (m.kind == MapKind::Location && m.room.empty())
                diags.push_back({m.loc, "location map needs a room name"});
            if (m.kind == MapKind::Threshold) {
                double v = 0;
                const auto [ptr, ec] = std::from_chars(m.threshold.data(), m.threshold.data() + m.threshold.size(), v);
                if (ec != std::errc() || ptr != m.threshold.data() + m.threshold.size() || !std::isfinite(v))
                    diags.push_back({m.loc, "threshold '" + m.threshold + "' is not a finite number"});
                sm.threshold = v;
            }
            def.maps.push_back(std::move(sm));
        }
        std::set<std::string> event_ids;
        for (const auto& e : n.events) {
            if (!event_ids.insert(e.id).second) {
                diags.push_back({e.loc, "duplicate event '" + e.id + "' in node '" + n.id + "'"});
                continue;
            }
            item_loc["node " + n.id + " event " + e.id] = e.loc;
            def.events.push_back({e.id, atoms(e.query)});
        }
        std::set<std::string> rule_ids;
        for (const auto& r : n.rules) {
            if (!rule_ids.insert(r.id).second) {
                diags.push_back({r.loc, "duplicate rule '" + r.id + "' in node '" + n.id + "'"});
                continue;
            }
            item_loc["node " + n.id + " rule " + r.id] = r.loc;
            def.rules.push_back({r.id, atoms(r.body), r.head});
        }
        nodes.emplace_back(std::move(def), intervals);
    }

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < ast.edges.size(); ++i) {
        const auto& e = ast.edges[i];
        item_loc["edge " + std::to_string(i)] = e.loc;
        edges.push_back({e.from, e.to, e.carries});
    }
    std::vector<Listener> listeners;
    for (std::size_t i = 0; i < ast.listeners.size(); ++i) {
        const auto& l = ast.listeners[i];
        item_loc["listener " + std::to_string(i)] = l.loc;
        listeners.push_back({l.source, l.event, l.target});
    }

    NetworkGraph graph(ast.name, std::move(nodes), std::move(edges), std::move(listeners), mode);
    for (const auto& issue : graph.validate()) {
        // Duplicate nodes were already reported against their declaration.
        if (issue.message.rfind("duplicate node", 0) == 0) continue;
        const auto it = item_loc.find(issue.item);
        diags.push_back({it != item_loc.end() ? it->second : ast.loc, issue.message});
    }
    if (diags.empty()) result.graph = std::move(graph);
    return result;
}

ResolveResult load(std::string_view source, const IntervalTable& intervals, Mode mode) {
    auto parsed = parse(source);
    if (!parsed.ok()) return ResolveResult{std::nullopt, std::move(parsed.diagnostics)};
    return resolve(*parsed.ast, intervals, mode);
}

NetworkAst to_ast(const NetworkGraph& graph) {
    NetworkAst ast;
    ast.name = graph.name();
    const auto atoms = [](const std::vector<Atom>& in) {
        std::vector<AtomAst> out;
        for (const auto& a : in) {
            AtomAst x;
            x.kind = a.kind;
            x.subject = a.subject;
            switch (a.kind) {
                case AtomKind::Is: x.state = a.expected_state; break;
                case AtomKind::InInterval: x.interval = std::string(to_string(a.interval)); break;
                case AtomKind::OccurredAfter:
                    x.object = a.object;
                    x.duration = duration_lit(a.delta);
                    break;
                case AtomKind::HeldFor:
                case AtomKind::FreshWithin: x.duration = duration_lit(a.delta); break;
            }
            out.push_back(std::move(x));
        }
        return out;
    };
    for (const auto& node : graph.nodes()) {
        const NodeDef& def = node.definition();
        NodeAst n;
        n.id = def.id;
        for (const auto& m : def.maps) {
            MapAst x;
            x.sensor = m.sensor;
            x.target = m.target;
            x.kind = m.kind;
            x.room = m.room;
            if (m.kind == MapKind::Threshold) x.threshold = number_text(m.threshold);
            n.maps.push_back(std::move(x));
        }
        for (const auto& e : def.events) n.events.push_back({e.id, atoms(e.query), {}});
        for (const auto& r : def.rules) n.rules.push_back({r.id, atoms(r.body), r.head, {}});
        ast.nodes.push_back(std::move(n));
    }
    for (const auto& e : graph.edges()) ast.edges.push_back({e.from, e.to, e.carries, {}});
    for (const auto& l : graph.listeners()) ast.listeners.push_back({l.source_node, l.event, l.target, {}});
    return ast;
}

}  // namespace ctxnet::dsl

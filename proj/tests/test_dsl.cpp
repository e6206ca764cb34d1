#include <fstream>
#include <random>
#include <sstream>

#include "ctxnet/activity_library.hpp"
#include "ctxnet/dsl.hpp"
#include "ctxnet/simulator.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace ctxnet;
using testsupport::chance;
using testsupport::SourceGen;
using testsupport::uniform;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string home_source() { return read_file(std::string(CTXNET_SOURCE_DIR) + "/models/home.ctxnet"); }

std::string wrap_rule(const std::string& rule) { return "network n {\n  node a {\n    " + rule + "\n  }\n}\n"; }

}  // namespace

TEST_SUITE("model-dsl") {

TEST_CASE("the TV rule parses into its AST") {
    const auto r = dsl::parse(wrap_rule(
        "rule w: heldFor(isIn_LivingRoom, 60s) & is(highBrightnessTV, true) & "
        "after(highBrightnessTV, isIn_LivingRoom, 60s) => emit WatchingTV"));
    REQUIRE(r.ok());
    CHECK(r.diagnostics.empty());
    const auto& rule = r.ast->nodes.at(0).rules.at(0);
    CHECK(rule.id == "w");
    CHECK(rule.head == "WatchingTV");
    REQUIRE(rule.body.size() == 3);
    CHECK(rule.body[0].kind == AtomKind::HeldFor);
    CHECK(rule.body[0].subject == "isIn_LivingRoom");
    CHECK(rule.body[0].duration == dsl::DurationLit{"60", "s"});
    CHECK(rule.body[1].kind == AtomKind::Is);
    CHECK(rule.body[1].state);
    CHECK(rule.body[2].kind == AtomKind::OccurredAfter);
    CHECK(rule.body[2].object == "isIn_LivingRoom");

    const auto g = dsl::load(wrap_rule("map A -> a contact\n    map B -> b motion\n"
                                      "    rule w: after(a, b, 1500ms) & heldFor(b, 2m) & freshWithin(a, 1h) => emit y"));
    REQUIRE(g.ok());
    const auto& atoms = g.graph->nodes().at(0).definition().rules.at(0).body;
    CHECK(atoms[0] == Atom::occurred_after("a", "b", Duration(1500)));
    CHECK(atoms[1] == Atom::held_for("b", Duration(120000)));
    CHECK(atoms[2] == Atom::fresh_within("a", Duration(3600000)));
}

TEST_CASE("an empty network is valid") {
    const auto r = dsl::parse("network empty { }");
    REQUIRE(r.ok());
    CHECK(r.ast->name == "empty");
    CHECK(r.ast->nodes.empty());
    CHECK(dsl::parse("# nothing here\nnetwork e{}\n# trailing\n").ok());
}

TEST_CASE("syntax errors carry a position") {
    const auto r = dsl::parse(wrap_rule("rule r: heldFor(x) => emit y"));
    CHECK_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].message.find("expected ',' and duration") != std::string::npos);
    CHECK(r.diagnostics[0].loc.line == 3);
    CHECK(r.diagnostics[0].loc.col == 22);
    CHECK(r.diagnostics[0].format("m.ctxnet").rfind("m.ctxnet:3:22: ", 0) == 0);

    for (const char* bad : {"", "network", "network n {", "network n { node }", "network n { node a { rule r: => emit y } }",
                            "network n { node a { rule r: is(x, maybe) => emit y } }",
                            "network n { node a { rule r: heldFor(x, 5 parsecs) => emit y } }",
                            "network n { node a { rule r: heldFor(x, 1.5s) => emit y } }",
                            "network n { node a { map S -> t location } }",
                            "network n { edge a -> b carries }", "network n { listen a activates b }",
                            "network n { } trailing", "network n { node a { map S -> t location \"open } }"}) {
        const auto p = dsl::parse(bad);
        CHECK_MESSAGE(!p.ok(), bad);
        CHECK_MESSAGE(!p.diagnostics.empty(), bad);
    }
}

TEST_CASE("semantic checks") {
    auto diag_of = [](const std::string& src) {
        const auto r = dsl::load(src);
        CHECK_FALSE(r.ok());
        REQUIRE_FALSE(r.diagnostics.empty());
        return r.diagnostics.front();
    };
    const auto dup = diag_of("network n {\n node a { }\n node a { }\n}");
    CHECK(dup.message.find("duplicate node") != std::string::npos);
    CHECK(dup.loc.line == 3);

    CHECK(diag_of(wrap_rule("rule r: inInterval(x, Dusk) => emit y")).message.find("unknown interval label") !=
          std::string::npos);
    CHECK(diag_of(wrap_rule("rule r: heldFor(x, 99999999999999999999h) => emit y")).message.find("overflow") !=
          std::string::npos);
    CHECK(diag_of(wrap_rule("rule r: heldFor(x, 9223372036854775807h) => emit y")).message.find("overflow") !=
          std::string::npos);
    CHECK(diag_of(wrap_rule("rule r: is(x, true) => emit y\n    rule r: is(x, true) => emit z"))
              .message.find("duplicate rule") != std::string::npos);

    // Graph validation findings are located at the offending declaration.
    const auto edge = diag_of("network n {\n node a { rule r: is(x, true) => emit y }\n node b { }\n edge a -> c carries y\n}");
    CHECK(edge.loc.line == 4);
}

TEST_CASE("listeners resolve to defined nodes") {
    const auto r = dsl::load(
        "network n {\n"
        "  node place {\n    map PIR1 -> isIn_Kitchen location \"Kitchen\"\n"
        "    event humanIn_Kitchen when is(isIn_Kitchen, true)\n  }\n"
        "  node A1 {\n    rule r: heldFor(isIn_Kitchen, 60s) => emit Cooking\n  }\n"
        "  edge place -> A1 carries isIn_Kitchen\n"
        "  listen place.humanIn_Kitchen activates A1\n}\n");
    REQUIRE(r.ok());
    REQUIRE(r.graph->listeners().size() == 1);
    const auto& l = r.graph->listeners()[0];
    CHECK(l.source_node == "place");
    CHECK(l.event == "humanIn_Kitchen");
    CHECK(l.target == "A1");
    CHECK(r.graph->find("A1") != nullptr);

    const auto missing = dsl::load(
        "network n {\n  node place { event e when is(x, true) }\n  listen place.e activates A1\n}\n");
    CHECK_FALSE(missing.ok());
}

TEST_CASE("the shipped network file is the canonical form of the built-in") {
    const auto text = home_source();
    CHECK(text == dsl::serialize(dsl::to_ast(build_home_network())));
    const auto r = dsl::load(text);
    REQUIRE(r.ok());
    CHECK(r.graph->same_definition(build_home_network()));
}

TEST_CASE("round trip on the shipped network") {
    const auto first = dsl::parse(home_source());
    REQUIRE(first.ok());
    const auto again = dsl::parse(dsl::serialize(*first.ast));
    REQUIRE(again.ok());
    CHECK(*again.ast == *first.ast);
}

TEST_CASE("round trip on generated sources") {
    std::mt19937_64 rng(2024);
    SourceGen gen(rng);
    for (int i = 0; i < 200; ++i) {
        const auto src = gen.network();
        const auto first = dsl::parse(src);
        REQUIRE_MESSAGE(first.ok(), src, "\n", first.diagnostics.empty() ? "" : first.diagnostics[0].format("gen"));
        const auto text = dsl::serialize(*first.ast);
        const auto again = dsl::parse(text);
        REQUIRE_MESSAGE(again.ok(), text);
        CHECK(*again.ast == *first.ast);
        CHECK(dsl::serialize(*again.ast) == text);
    }
}

TEST_CASE("arbitrary bytes give an AST or diagnostics") {
    std::mt19937_64 rng(7);
    const auto base = home_source();
    const std::string alphabet = "network node rule event map edge listen carries activates when emit "
                                 "is heldFor after inInterval freshWithin (){}:,.&=>-\"#\n 0123456789msh";
    for (int i = 0; i < 3000; ++i) {
        std::string src;
        if (i % 3 == 0) {
            const int n = uniform(rng, 0, 200);
            for (int k = 0; k < n; ++k) src += static_cast<char>(uniform(rng, 0, 255));
        } else if (i % 3 == 1) {
            const int n = uniform(rng, 0, 300);
            for (int k = 0; k < n; ++k) src += alphabet[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(alphabet.size()) - 1))];
        } else {
            src = base;
            for (int k = uniform(rng, 1, 6); k > 0; --k) {
                const auto at = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(src.size()) - 1));
                if (chance(rng, 0.5))
                    src.erase(at, static_cast<std::size_t>(uniform(rng, 1, 8)));
                else
                    src.insert(at, 1, alphabet[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(alphabet.size()) - 1))]);
            }
        }
        const auto p = dsl::parse(src);
        CHECK(p.ok() != !p.diagnostics.empty());
        if (p.ok()) {
            CHECK(p.diagnostics.empty());
            const auto r = dsl::resolve(*p.ast);
            CHECK(r.ok() != !r.diagnostics.empty());
        }
    }
}

TEST_CASE("the shipped file behaves exactly like the built-in network") {
    const auto text = home_source();
    for (auto mode : {Mode::CAE, Mode::PAE}) {
        for (auto start : {at_time_of_day(8, 0), at_time_of_day(19, 0)}) {
            for (double fo : {2.0, 1.0 / 3.0}) {
                SchedulerConfig cfg;
                cfg.reasoning_hz = fo;
                auto loaded = *dsl::load(text, IntervalTable::standard(), mode).graph;
                auto built = build_home_network(mode);
                const auto a = simulate(loaded, fig4_scenario(start), cfg);
                const auto b = simulate(built, fig4_scenario(start), cfg);
                CHECK(a.activities == b.activities);
                CHECK(a.activities.size() == 5);
            }
        }
    }
}

}  // TEST_SUITE

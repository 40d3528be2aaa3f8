#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "nufab/netlist.hpp"

using namespace nufab;

static Netlist parse_str(const std::string &s, size_t k_max = 4)
{
    std::istringstream in(s);
    return parse_blif(in, k_max);
}

TEST_CASE("identity netlist parses to a single buffer node")
{
    Netlist nl = parse_str(".model a\n.inputs x\n.outputs y\n.names x y\n1 1\n.end\n");
    CHECK(nl.name == "a");
    REQUIRE(nl.nodes.size() == 1);
    CHECK(nl.nodes[0].output == "y");
    CHECK(nl.nodes[0].fanin == std::vector<std::string>{"x"});
    CHECK(nl.nodes[0].truth == std::vector<uint8_t>{0, 1});
}

TEST_CASE("AND cover gives table 0001")
{
    Netlist nl = parse_str(".model m\n.inputs a b\n.outputs c\n.names a b c\n11 1\n.end\n");
    REQUIRE(nl.nodes.size() == 1);
    CHECK(nl.nodes[0].truth == std::vector<uint8_t>{0, 0, 0, 1});
}

TEST_CASE("don't-care rows expand into the table")
{
    // c is true when a=1 regardless of b: rows 01 (a=1,b=0) and 11
    Netlist nl = parse_str(".model m\n.inputs a b\n.outputs c\n.names a b c\n1- 1\n.end\n");
    CHECK(nl.nodes[0].truth == std::vector<uint8_t>{0, 1, 0, 1});
}

TEST_CASE("half-adder-array fixture parses to at most 4 LUT nodes")
{
    Netlist nl = parse_str(fixture("ha_array.blif"));
    CHECK(nl.nodes.size() <= 4);
    CHECK(nl.inputs.size() == 4);
    CHECK(nl.outputs.size() == 3);
    for (const auto &n : nl.nodes)
        CHECK(n.fanin.size() <= 4);
}

TEST_CASE("eval: identity and AND")
{
    Netlist id = parse_str(".model a\n.inputs x\n.outputs y\n.names x y\n1 1\n.end\n");
    CHECK(eval_netlist(id, {{"x", true}}).at("y") == true);
    CHECK(eval_netlist(id, {{"x", false}}).at("y") == false);

    Netlist a2 = parse_str(fixture("and2.blif"));
    CHECK(eval_netlist(a2, {{"a", true}, {"b", false}}).at("c") == false);
    CHECK(eval_netlist(a2, {{"a", true}, {"b", true}}).at("c") == true);
}

TEST_CASE("eval: adder fixture matches brute-force arithmetic oracle")
{
    Netlist nl = parse_str(fixture("ha_array.blif"));
    for (int a = 0; a < 4; a++)
        for (int b = 0; b < 4; b++) {
            std::map<std::string, bool> in{{"a0", (a & 1) != 0},
                                           {"a1", (a & 2) != 0},
                                           {"b0", (b & 1) != 0},
                                           {"b1", (b & 2) != 0}};
            auto out = eval_netlist(nl, in);
            int sum = int(out.at("s0")) + 2 * int(out.at("s1")) + 4 * int(out.at("cout"));
            CHECK(sum == a + b);
        }
}

TEST_CASE("eval: sequential fixture shifts under enable")
{
    Netlist nl = parse_str(fixture("seq2.blif"));
    REQUIRE(nl.latches.size() == 2);
    // d=1, en=1, state q0=0 q1=0: next q0 (n0) = 1, next q1 (n1) = 0
    auto out = eval_netlist(nl, {{"d", true}, {"en", true}, {"q0", false}, {"q1", false}});
    CHECK(out.at("n0") == true);
    CHECK(out.at("n1") == false);
    // en=0 holds state
    out = eval_netlist(nl, {{"d", true}, {"en", false}, {"q0", true}, {"q1", false}});
    CHECK(out.at("n0") == true);
    CHECK(out.at("n1") == false);
}

TEST_CASE("eval rejects missing assignments and loops")
{
    Netlist nl = parse_str(fixture("and2.blif"));
    CHECK_THROWS_WITH_AS(eval_netlist(nl, {{"a", true}}), doctest::Contains("b"), Error);

    Netlist loop = parse_str(".model l\n.inputs x\n.outputs y\n"
                             ".names x z y\n11 1\n.names y z\n1 1\n.end\n");
    try {
        eval_netlist(loop, {{"x", true}});
        FAIL("expected CombinationalLoop");
    } catch (const Error &e) {
        CHECK(e.kind() == "CombinationalLoop");
    }
}

TEST_CASE("parser rejections carry line context")
{
    auto expect_kind = [](const std::string &text, const std::string &kind) {
        try {
            parse_str(text);
            FAIL("expected ", kind, " for: ", text);
        } catch (const Error &e) {
            CHECK(e.kind() == kind);
            CHECK(!e.where().empty());
        }
    };
    // unknown directive
    expect_kind(".model m\n.inputs a\n.outputs z\n.wires a z\n.end\n", "SyntaxError");
    // undriven net
    expect_kind(".model m\n.inputs a\n.outputs z\n.names a q z\n11 1\n.end\n", "SemanticError");
    // duplicate driver
    expect_kind(".model m\n.inputs a b\n.outputs z\n.names a z\n1 1\n.names b z\n1 1\n.end\n", "SemanticError");
    // fan-in over K_max
    expect_kind(".model m\n.inputs a b c d e\n.outputs z\n.names a b c d e z\n11111 1\n.end\n", "SemanticError");
    // malformed cover row
    expect_kind(".model m\n.inputs a\n.outputs z\n.names a z\n2 1\n.end\n", "SyntaxError");
}

TEST_CASE("mutated fixture corpus is rejected with located errors")
{
    std::string good = fixture("ha_array.blif");
    std::vector<std::pair<std::string, std::string>> mutations = {
        {".inputs a0 a1 b0 b1", ".inputs a0 a1 b0"},       // makes b1 undriven
        {".names a0 b0 c0", ".names a0 b0 s0"},            // duplicate driver
        {"11 1", "111 1"},                                 // row width mismatch
    };
    for (const auto &[from, to] : mutations) {
        std::string bad = good;
        auto p = bad.find(from);
        REQUIRE(p != std::string::npos);
        bad.replace(p, from.size(), to);
        CHECK_THROWS_AS(parse_str(bad), Error);
    }
}

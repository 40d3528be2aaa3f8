#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nufab/attack.hpp"

using namespace nufab;

namespace {

struct FlowArtifacts {
    FabricModel f;
    Mapping m;
    Bitstream b;
    KeyedNetlist kn;
};

FlowArtifacts run_flow(const std::string &blif, const ArchTemplate &t, int w, int h)
{
    FlowArtifacts a;
    FabricLayout l = make_uniform_layout(w, h, t);
    a.f = elaborate(l, build_pin_map(l, t.seed, t.n_ble * t.k), build_segments(t.w_ch, t.l1_mix), t);
    Netlist nl = parse_blif(fixture(blif));
    a.m = map_design(nl, a.f);
    a.b = generate_bitstream(a.m, nl, a.f);
    a.kn = export_keyed_bench(a.f, a.m);
    return a;
}

ArchTemplate desk_template()
{
    ArchTemplate t;
    t.n_ble = 2;
    t.k = 3;
    t.w_ch = 2;
    t.l1_mix = 1.0;
    t.clb_inputs = 6;
    t.io_capacity = 2;
    return t;
}

// 2-input LUT as key-selected minterms: key bit i enables minterm i of (a,b)
KeyedNetlist lut2_keyed()
{
    KeyedNetlist kn;
    kn.gn.name = "lut2";
    kn.gn.inputs = {"a", "b", "key0", "key1", "key2", "key3"};
    kn.gn.outputs = {"y"};
    kn.gn.gates.push_back({GateKind::Not, "a_n", {"a"}});
    kn.gn.gates.push_back({GateKind::Not, "b_n", {"b"}});
    kn.gn.gates.push_back({GateKind::And, "m0", {"key0", "a_n", "b_n"}});
    kn.gn.gates.push_back({GateKind::And, "m1", {"key1", "a", "b_n"}});
    kn.gn.gates.push_back({GateKind::And, "m2", {"key2", "a_n", "b"}});
    kn.gn.gates.push_back({GateKind::And, "m3", {"key3", "a", "b"}});
    kn.gn.gates.push_back({GateKind::Or, "y", {"m0", "m1", "m2", "m3"}});
    kn.key_bits = {0, 1, 2, 3};
    return kn;
}

} // namespace

TEST_CASE("every configuration bit of the fabric becomes a key input")
{
    FlowArtifacts a = run_flow("and2.blif", desk_template(), 1, 1);
    CHECK(int(a.kn.key_bits.size()) == count_config_bits(a.f));
    std::set<std::string> ins(a.kn.gn.inputs.begin(), a.kn.gn.inputs.end());
    for (int pos : a.kn.key_bits)
        CHECK(ins.count("key" + std::to_string(pos)));
    CHECK(correct_key(a.kn, a.b).size() == a.kn.key_bits.size());

    // the export is legal BENCH text and parses back to the same structure
    std::ostringstream os;
    write_bench(a.kn.gn, os);
    GateNetlist back = parse_bench(os.str());
    CHECK(back.inputs == a.kn.gn.inputs);
    CHECK(back.outputs == a.kn.gn.outputs);
    CHECK(back.gates.size() == a.kn.gn.gates.size());
}

TEST_CASE("the bitstream key makes the exported netlist mimic the fabric")
{
    for (const char *blif : {"and2.blif", "seq2.blif"}) {
        CAPTURE(blif);
        FlowArtifacts a = run_flow(blif, desk_template(), 1, 1);
        Oracle oracle = make_fabric_oracle(a.f, a.b, a.m, a.kn);
        std::map<std::string, bool> key = correct_key(a.kn, a.b);

        // the raw export is cyclic through the routing muxes; evaluate the
        // unrolled acyclic model instead, as the attacker would
        UnrolledModel um = break_cycles(full_scan(a.kn.gn).comb);
        std::set<std::string> keys;
        for (const auto &[k, v] : key)
            keys.insert(k);
        std::vector<std::string> pis;
        for (const auto &in : um.gn.inputs)
            if (!keys.count(in))
                pis.push_back(in);
        REQUIRE(pis.size() <= 6);
        for (long p = 0; p < (1L << pis.size()); p++) {
            std::map<std::string, bool> assign;
            for (size_t i = 0; i < pis.size(); i++)
                assign[pis[i]] = ((p >> i) & 1) != 0;
            std::map<std::string, bool> want = oracle(assign);
            std::map<std::string, bool> keyed = assign;
            for (const auto &[k, v] : key)
                keyed[k] = v;
            std::map<std::string, bool> got = eval_gate_netlist(um.gn, keyed);
            for (const auto &po : um.gn.outputs)
                CHECK(got.at(po) == want.at(po.substr(0, po.find('@'))));
        }
    }
}

TEST_CASE("acyclic netlists pass through cycle breaking untouched")
{
    GateNetlist g = to_gate_netlist(parse_blif(fixture("ha_array.blif")));
    UnrolledModel um = break_cycles(g);
    CHECK(um.gn == g);
    CHECK(um.frames == 1);
    CHECK(um.feedback_edges == 0);
}

TEST_CASE("a combinational loop unrolls to its settled fixed point")
{
    // a = x OR b, b = y AND a: from an all-zero start this settles to
    // a = x, b = x AND y
    GateNetlist g;
    g.name = "loop";
    g.inputs = {"x", "y"};
    g.outputs = {"a", "b"};
    g.gates.push_back({GateKind::Or, "a", {"x", "b"}});
    g.gates.push_back({GateKind::And, "b", {"y", "a"}});

    UnrolledModel um = break_cycles(g, 3);
    CHECK(um.frames == 3);
    CHECK(um.feedback_edges == 1);
    for (int p = 0; p < 4; p++) {
        bool x = p & 1, y = p & 2;
        auto out = eval_gate_netlist(um.gn, {{"x", x}, {"y", y}});
        // last-frame outputs carry the frame tag
        CHECK(out.at("a@3") == x);
        CHECK(out.at("b@3") == (x && y));
    }
}

TEST_CASE("a keyless miter admits no distinguishing input")
{
    GateNetlist g;
    g.inputs = {"x"};
    g.outputs = {"y"};
    g.gates.push_back({GateKind::Buff, "y", {"x"}});
    Miter mt;
    build_miter(mt, g, {});
    CHECK(mt.solver.solve({sat::mk_lit(mt.act)}) == sat::Result::Unsat);
    CHECK(mt.solver.solve({sat::mk_lit(mt.act, true)}) == sat::Result::Sat);
}

TEST_CASE("oracle-guided attack recovers a hand-built 4-bit LUT key")
{
    KeyedNetlist kn = lut2_keyed();
    std::map<std::string, bool> secret = {
        {"key0", false}, {"key1", false}, {"key2", false}, {"key3", true}}; // AND
    Oracle oracle = [&](const std::map<std::string, bool> &in) {
        std::map<std::string, bool> full = in;
        for (const auto &[k, v] : secret)
            full[k] = v;
        return eval_gate_netlist(kn.gn, full);
    };

    AttackResult res = sat_attack(kn, oracle);
    REQUIRE(res.status == AttackStatus::Success);
    CHECK(res.dip_count >= 1);
    CHECK(res.dip_count <= 4);
    CHECK(res.key.size() == 4);
    CHECK(keys_equivalent(kn, res.key, secret));
    // with all four minterms probed the key is unique, hence exact
    CHECK(res.key == secret);

    AttackBudget strangled;
    strangled.max_dips = 1;
    AttackResult cut = sat_attack(kn, oracle, strangled);
    CHECK(cut.status == AttackStatus::Timeout);
    CHECK(cut.dip_count == 1);
}

TEST_CASE("an unkeyed design needs no distinguishing inputs at all")
{
    KeyedNetlist kn;
    kn.gn.inputs = {"x"};
    kn.gn.outputs = {"y"};
    kn.gn.gates.push_back({GateKind::Not, "y", {"x"}});
    Oracle oracle = [&](const std::map<std::string, bool> &in) { return eval_gate_netlist(kn.gn, in); };
    AttackResult res = sat_attack(kn, oracle);
    CHECK(res.status == AttackStatus::Success);
    CHECK(res.dip_count == 0);
    CHECK(res.key.empty());
}

TEST_CASE("the full attack breaks a desk-scale fabric")
{
    // smallest template that still routes the design: every used path crosses
    // at most a few structural feedback edges, so 3 unroll frames settle it
    ArchTemplate t;
    t.n_ble = 1;
    t.k = 2;
    t.w_ch = 2;
    t.l1_mix = 1.0;
    t.clb_inputs = 2;
    t.io_capacity = 1;
    const int frames = 3;

    FlowArtifacts a = run_flow("and2.blif", t, 1, 1);
    Oracle oracle = make_fabric_oracle(a.f, a.b, a.m, a.kn);
    AttackBudget budget;
    budget.seconds = 540;
    AttackResult res = sat_attack(a.kn, oracle, budget, frames);
    REQUIRE(res.status == AttackStatus::Success);
    CHECK(res.dip_count >= 1);
    CHECK(res.unroll_frames == frames);
    CHECK(keys_equivalent(a.kn, res.key, correct_key(a.kn, a.b), frames));

    SecurityStats st = security_stats(a.kn, a.f, frames);
    CHECK(st.key_bits == count_config_bits(a.f));
    CHECK(st.bitstream_bits == st.key_bits);
    CHECK(st.n_variables > st.key_bits);
    CHECK(st.vars_per_bit > 0);
}

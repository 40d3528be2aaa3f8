#include <algorithm>
#include <fstream>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "nufab/arch.hpp"
#include "nufab/placement.hpp"

using namespace nufab;

TEST_CASE("segment list splits the channel by the L1 share")
{
    SegmentSpec s = build_segments(8, 0.5);
    REQUIRE(s.segments.size() == 2);
    CHECK(s.segments[0].name == "L1");
    CHECK(s.segments[0].length == 1);
    CHECK(s.segments[0].tracks == 4);
    CHECK(s.segments[1].name == "L4");
    CHECK(s.segments[1].length == 4);
    CHECK(s.segments[1].tracks == 4);
    CHECK(s.track_length(0) == 1);
    CHECK(s.track_length(3) == 1);
    CHECK(s.track_length(4) == 4);
    CHECK(s.track_length(7) == 4);
    CHECK_THROWS_AS(s.track_length(8), RangeError);

    SegmentSpec all_l1 = build_segments(6, 1.0);
    REQUIRE(all_l1.segments.size() == 1);
    CHECK(all_l1.segments[0].name == "L1");
    CHECK(all_l1.segments[0].tracks == 6);

    SegmentSpec all_l4 = build_segments(6, 0.0);
    REQUIRE(all_l4.segments.size() == 1);
    CHECK(all_l4.segments[0].name == "L4");
    CHECK(all_l4.segments[0].tracks == 6);

    // fractional shares truncate toward L4
    SegmentSpec odd_mix = build_segments(8, 0.3);
    CHECK(odd_mix.segments[0].tracks == 2);
    CHECK(odd_mix.segments[1].tracks == 6);
}

TEST_CASE("segment list rejects odd or degenerate widths")
{
    CHECK_THROWS_AS(build_segments(7, 0.5), Error);
    CHECK_THROWS_AS(build_segments(0, 0.5), Error);
    CHECK_THROWS_AS(build_segments(8, 1.5), Error);
    CHECK_THROWS_AS(build_segments(8, -0.1), Error);
}

TEST_CASE("pin map holds one full permutation per logic tile")
{
    ArchTemplate t;
    FabricLayout l = make_uniform_layout(3, 3, t);
    int n_pins = t.n_ble * t.k;
    PinMap pm = build_pin_map(l, 7, n_pins);
    REQUIRE(pm.perm.size() == 9);
    for (const auto &[coord, p] : pm.perm) {
        std::set<int> seen(p.begin(), p.end());
        CHECK(int(p.size()) == n_pins);
        CHECK(int(seen.size()) == n_pins);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == n_pins - 1);
    }

    // deterministic in the seed, and tiles are scrambled independently
    CHECK(build_pin_map(l, 7, n_pins) == pm);
    CHECK(build_pin_map(l, 8, n_pins).perm != pm.perm);
    int distinct = 0;
    for (const auto &[coord, p] : pm.perm)
        distinct += p != pm.perm.begin()->second;
    CHECK(distinct >= 7);
}

TEST_CASE("pin map depends on tile position, not iteration order")
{
    ArchTemplate t;
    FabricLayout small = make_uniform_layout(2, 2, t);
    FabricLayout big = make_uniform_layout(4, 4, t);
    PinMap ps = build_pin_map(small, 3, 8);
    PinMap pb = build_pin_map(big, 3, 8);
    for (const auto &[coord, p] : ps.perm)
        CHECK(pb.perm.at(coord) == p);
}

static void check_round_trip(const FabricLayout &l, const ArchTemplate &t)
{
    PinMap pm = build_pin_map(l, t.seed, t.n_ble * t.k);
    SegmentSpec segs = build_segments(t.w_ch, t.l1_mix);
    std::string xml = emit_arch_xml(l, pm, segs, t);
    ArchFile a = parse_arch_xml(xml);
    CHECK(a.layout.tiles == l.tiles);
    CHECK(a.layout.strategy == l.strategy);
    CHECK(a.layout.relocation == l.relocation);
    CHECK(a.layout.grid_width() == l.grid_width());
    CHECK(a.pins == pm);
    CHECK(a.segments == segs);
    CHECK(a.tmpl == t);
    // re-emission from the parsed model is byte-identical
    CHECK(emit_arch_xml(a.layout, a.pins, a.segments, a.tmpl) == xml);
}

TEST_CASE("architecture files survive an emit/parse round trip")
{
    ArchTemplate t;
    check_round_trip(make_uniform_layout(1, 1, t), t);
    check_round_trip(make_uniform_layout(6, 6, t), t);

    ArchTemplate t2;
    t2.io_capacity = 4;
    t2.n_ble = 2;
    t2.k = 3;
    t2.w_ch = 4;
    t2.l1_mix = 0.25;
    t2.clb_inputs = 6;
    t2.fc_in = 0.25;
    t2.fc_out = 0.5;
    t2.seed = 99;
    check_round_trip(make_uniform_layout(3, 5, t2), t2);

    UtilizationMap u = extract_utilization(parse_place(fixture("arbiter.place")));
    ArchTemplate t3;
    t3.seed = 42;
    check_round_trip(conservative_layout(u, t3), t3);
    check_round_trip(compact_layout(u, t3), t3);
}

TEST_CASE("parser rejects structurally bad architecture files")
{
    CHECK_THROWS_AS(parse_arch_xml("<arch></arch>"), SyntaxError);
    CHECK_THROWS_AS(parse_arch_xml("<architecture></architecture>"), SyntaxError);

    ArchTemplate t;
    FabricLayout l = make_uniform_layout(2, 2, t);
    PinMap pm = build_pin_map(l, t.seed, t.n_ble * t.k);
    SegmentSpec segs = build_segments(t.w_ch, t.l1_mix);
    std::string xml = emit_arch_xml(l, pm, segs, t);

    std::string bad_type = xml;
    bad_type.replace(bad_type.find("type=\"clb\""), 10, "type=\"alb\"");
    CHECK_THROWS_AS(parse_arch_xml(bad_type), SyntaxError);

    std::string off_grid = xml;
    off_grid.replace(off_grid.find("x=\"0\" y=\"0\""), 11, "x=\"9\" y=\"0\"");
    CHECK_THROWS_AS(parse_arch_xml(off_grid), RangeError);

    CHECK_THROWS_AS(parse_arch_xml(xml + "<extra/>"), SyntaxError);
}

TEST_CASE("frozen architecture file for the 3x3-core design stays stable")
{
    Placement p = parse_place(fixture("seq_comb.place"));
    UtilizationMap u = extract_utilization(p);
    ArchTemplate t;
    FabricLayout l = compact_layout(u, t);
    PinMap pm = build_pin_map(l, t.seed, t.n_ble * t.k);
    SegmentSpec segs = build_segments(t.w_ch, t.l1_mix);
    std::string xml = emit_arch_xml(l, pm, segs, t);
    CHECK(xml == read_file(golden_dir() + "/seq_comb_compact.xml"));
}

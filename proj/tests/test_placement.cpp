#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "nufab/placement.hpp"

using namespace nufab;

static Placement parse_str(const std::string &s)
{
    std::istringstream in(s);
    return parse_place(in);
}

TEST_CASE("header-only file parses to an empty placement")
{
    Placement p = parse_str("Array size: 8 x 8 logic blocks\n");
    CHECK(p.grid_width == 8);
    CHECK(p.grid_height == 8);
    CHECK(p.entries.empty());
}

TEST_CASE("arbiter fixture: 8x8 array, 5 CLB + 21 IO entries")
{
    Placement p = parse_str(fixture("arbiter.place"));
    CHECK(p.grid_width == 8);
    CHECK(p.grid_height == 8);
    CHECK(p.entries.size() == 26);

    UtilizationMap u = extract_utilization(p);
    CHECK(u.n_clb == 5);
    CHECK(u.n_io == 21);
}

TEST_CASE("cacode fixture yields n_clb = 7")
{
    Placement p = parse_str(fixture("cacode.place"));
    UtilizationMap u = extract_utilization(p);
    CHECK(u.n_clb == 7);
}

TEST_CASE("used-tile counts across the fixture corpus")
{
    struct Row {
        const char *file;
        int used;
    };
    for (const Row &r : {Row{"cacode.place", 7}, Row{"aes_shr.place", 3}, Row{"seq_comb.place", 5},
                         Row{"ctrl.place", 5}, Row{"arbiter.place", 5}, Row{"ldst.place", 1}, Row{"logic7.place", 7},
                         Row{"fa_array.place", 1}, Row{"sbox_8.place", 1}}) {
        CAPTURE(r.file);
        Placement p = parse_str(fixture(r.file));
        UtilizationMap u = extract_utilization(p);
        CHECK(u.n_clb == r.used);
        CHECK(u.n_clb <= (p.grid_width - 2) * (p.grid_height - 2));
    }
}

TEST_CASE("rejections: duplicates, range, missing header")
{
    std::string base = "Array size: 4 x 4 logic blocks\n";

    CHECK_THROWS_AS(parse_str("block x y\n"), SyntaxError);

    try {
        parse_str(base + "a\t1\t1\t0\t#0\nb\t1\t1\t0\t#1\n");
        FAIL("duplicate (x,y,subtile) accepted");
    } catch (const Error &e) {
        CHECK(e.kind() == "SemanticError");
    }

    CHECK_THROWS_AS(parse_str(base + "a\t9\t1\t0\t#0\n"), RangeError);
    CHECK_THROWS_AS(parse_str(base + "a\tq\t1\t0\t#0\n"), SyntaxError);
}

TEST_CASE("write_place round trip is idempotent")
{
    Placement p;
    p.grid_width = 6;
    p.grid_height = 6;
    p.entries = {{"clb_a", 2, 2, 0}, {"clb_b", 2, 2, 1}, {"io_a", 0, 3, 4}, {"io_b", 5, 1, 7}};
    std::ostringstream os;
    write_place(p, os);
    Placement q = parse_str(os.str());
    CHECK(q.grid_width == p.grid_width);
    CHECK(q.entries.size() == p.entries.size());

    UtilizationMap u1 = extract_utilization(p);
    UtilizationMap u2 = extract_utilization(q);
    CHECK(u1.n_clb == u2.n_clb);
    CHECK(u1.n_io == u2.n_io);
    CHECK(u1.used_clb_coords == u2.used_clb_coords);
    CHECK(u1.per_tile_ble_usage.at({2, 2}) == 2);
}

TEST_CASE("classifier conflicts are surfaced")
{
    Placement p = parse_str("Array size: 4 x 4 logic blocks\nmid\t1\t1\t0\t#0\n");
    auto bad = [](const PlaceEntry &) { return BlockClass::Io; }; // interior tile called IO
    try {
        extract_utilization(p, bad);
        FAIL("expected ClassifierConflict");
    } catch (const Error &e) {
        CHECK(e.kind() == "ClassifierConflict");
    }
}

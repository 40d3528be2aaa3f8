#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nufab/report.hpp"

using namespace nufab;

namespace {

AreaSample sample(int clb, int io, int corner, int empty, double area)
{
    return {{clb, io, corner, empty}, area};
}

// the nine published uniform-fabric reference areas used for calibration
std::vector<AreaSample> reference_samples()
{
    return {
        sample(1, 4, 4, 0, 64195),    sample(1, 4, 4, 0, 64195),   sample(1, 4, 4, 0, 64195),
        sample(4, 8, 4, 0, 212716),   sample(9, 12, 4, 0, 513361), sample(9, 12, 4, 0, 513361),
        sample(9, 12, 4, 0, 560845),  sample(9, 12, 4, 0, 529113), sample(36, 24, 4, 0, 2026867),
    };
}

} // namespace

TEST_CASE("calibration recovers exact synthetic coefficients")
{
    std::vector<AreaSample> s = {
        sample(1, 4, 4, 0, 1 * 100.0 + 4 * 10.0 + 4 * 3.0),
        sample(4, 8, 4, 2, 4 * 100.0 + 8 * 10.0 + 4 * 3.0 + 2 * 1.0),
        sample(9, 12, 4, 0, 9 * 100.0 + 12 * 10.0 + 4 * 3.0),
        sample(16, 16, 4, 5, 16 * 100.0 + 16 * 10.0 + 4 * 3.0 + 5 * 1.0),
    };
    AreaModel m = calibrate_area_model(s);
    CHECK(m.clb == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(m.io == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(m.corner == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(m.empty == doctest::Approx(1.0).epsilon(1e-6));
    for (double r : m.residuals)
        CHECK(std::fabs(r) < 1e-9);
}

TEST_CASE("calibration clamps rather than producing negative coefficients")
{
    // io column pushes negative under plain least squares; the active-set
    // refit must land on a nonnegative model that still fits decently
    AreaModel m = calibrate_area_model(reference_samples());
    CHECK(m.clb >= 0);
    CHECK(m.io >= 0);
    CHECK(m.corner >= 0);
    CHECK(m.clb > m.io); // a logic tile dwarfs an IO tile
    REQUIRE(m.residuals.size() == 9);
    for (double r : m.residuals)
        CHECK(std::fabs(r) < 0.15);
}

TEST_CASE("degenerate calibration inputs are rejected")
{
    CHECK_THROWS_WITH_AS(calibrate_area_model({sample(1, 4, 4, 0, 100), sample(2, 8, 4, 0, 200)}),
                         doctest::Contains("samples"), Error);
    // three copies of one observation: plenty of rows, no rank
    CHECK_THROWS_AS(
        calibrate_area_model({sample(1, 4, 4, 0, 100), sample(1, 4, 4, 0, 100), sample(1, 4, 4, 0, 100)}), Error);
}

TEST_CASE("relative area delta is a plain signed percentage")
{
    CHECK(delta_area(100.0, 50.0) == doctest::Approx(-50.0));
    CHECK(delta_area(100.0, 130.0) == doctest::Approx(30.0));
    CHECK(std::round(delta_area(2026867.0, 353273.5) * 100) / 100 == doctest::Approx(-82.57));
}

TEST_CASE("tile counting and area estimation agree with the layout")
{
    ArchTemplate t;
    FabricLayout l = make_uniform_layout(6, 6, t);
    TileCounts c = count_tiles(l);
    CHECK(c.clb == 36);
    CHECK(c.io == 24);
    CHECK(c.corner == 4);
    CHECK(c.empty == 0);
    AreaModel m{10, 2, 1, 0.5, {}};
    CHECK(estimate_area(l, m) == doctest::Approx(36 * 10 + 24 * 2 + 4 * 1));

    UtilizationMap u = extract_utilization(parse_place(fixture("arbiter.place")));
    FabricLayout comp = compact_layout(u, t);
    TileCounts cc = count_tiles(comp);
    CHECK(cc.clb + cc.io + cc.corner + cc.empty == comp.grid_width() * comp.grid_height());
    CHECK(estimate_area(comp, m) < estimate_area(l, m));
}

TEST_CASE("utilization summaries follow the occupancy map")
{
    ArchTemplate t; // n_ble = 4
    UtilizationMap u;
    u.n_clb = 3;
    u.n_io = 5;
    u.per_tile_ble_usage = {{{1, 1}, 4}, {{2, 1}, 2}, {{1, 2}, 1}};
    FabricLayout l = make_uniform_layout(3, 3, t); // 9 logic tiles

    UtilAverages a = utilization_averages(u, l, t);
    // occupied fractions: 1.0, 0.5, 0.25
    CHECK(a.over_occupied == doctest::Approx((1.0 + 0.5 + 0.25) / 3));
    CHECK(a.over_all_tiles == doctest::Approx((1.0 + 0.5 + 0.25) / 9));
    CHECK(a.over_occupied >= a.over_all_tiles);

    UtilizationStats s = utilization_stats(l, u);
    CHECK(s.total_clb == 9);
    CHECK(s.used_clb == 3);
    CHECK(s.total_io_pads == 12 * t.io_capacity);
    CHECK(s.clb_util == doctest::Approx(3.0 / 9));

    // compaction removes empty logic tiles: the all-tile average converges up
    u.used_clb_coords = {{1, 1}, {2, 1}, {1, 2}};
    FabricLayout comp = compact_layout(u, t);
    UtilAverages ac = utilization_averages(u, comp, t);
    CHECK(ac.over_all_tiles >= a.over_all_tiles);
    CHECK(ac.over_all_tiles == doctest::Approx(ac.over_occupied));
}

TEST_CASE("flow summary rows serialize as well-formed CSV")
{
    FlowRow r;
    r.design = "adder";
    r.strategy = "compact";
    r.width = 2;
    r.height = 3;
    r.counts = {5, 4, 4, 7};
    r.config_bits = 123;
    r.util.used_clb = 5;
    r.util.used_io = 6;
    r.util.clb_util = 1.0;
    r.util.io_util = 0.1875;
    r.area = 353273.5;
    r.delta_vs_uniform = -82.57;

    std::ostringstream os;
    write_flow_csv({r, r}, os);
    std::istringstream is(os.str());
    std::string header, line1, line2, extra;
    REQUIRE(std::getline(is, header));
    REQUIRE(std::getline(is, line1));
    REQUIRE(std::getline(is, line2));
    CHECK(!std::getline(is, extra));
    CHECK(line1 == line2);
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(line1.begin(), line1.end(), ','));
    CHECK(line1.find("adder,compact,2,3,5,4,4,7,123,5,6,1.0000,0.1875,353273.50,-82.57") == 0);
}

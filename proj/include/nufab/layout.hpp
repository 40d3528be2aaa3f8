#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nufab/errors.hpp"
#include "nufab/placement.hpp"

namespace nufab {

enum class TileKind { Corner, Io, Clb, Empty };

enum class Strategy { Uniform, Conservative, Compact };

inline const char *strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::Uniform: return "uniform";
    case Strategy::Conservative: return "conservative";
    case Strategy::Compact: return "compact";
    }
    return "?";
}

// Architecture template knobs. K is the LUT size, N_ble the BLEs per CLB.
struct ArchTemplate {
    int io_capacity = 8;  // C_io, pins per IO tile
    int n_ble = 4;        // BLEs per CLB
    int k = 4;            // LUT inputs
    int w_ch = 8;         // channel width
    double l1_mix = 0.5;  // share of L1 tracks; remainder is L4
    int clb_inputs = 10;  // tile input pins feeding the crossbar
    double fc_in = 0.5;
    double fc_out = 0.25;
    uint64_t seed = 1;

    bool operator==(const ArchTemplate &) const = default;
};

// The (W+2)x(H+2) tile grid with interior logic dimensions W x H. Ring cells
// are IO, EMPTY or CORNER; interior cells are CLB or EMPTY. All IO tiles share
// io_capacity pins.
struct FabricLayout {
    int width = 0;  // interior logic columns
    int height = 0; // interior logic rows
    int io_capacity = 8;
    Strategy strategy = Strategy::Uniform;
    std::vector<TileKind> tiles; // row-major, (width+2) per row
    std::map<std::pair<int, int>, std::pair<int, int>> relocation; // original -> new CLB coords

    bool operator==(const FabricLayout &) const = default;

    int grid_width() const { return width + 2; }
    int grid_height() const { return height + 2; }

    TileKind at(int x, int y) const { return tiles.at(size_t(y) * grid_width() + x); }
    void set(int x, int y, TileKind k) { tiles.at(size_t(y) * grid_width() + x) = k; }

    bool is_ring(int x, int y) const { return x == 0 || y == 0 || x == width + 1 || y == height + 1; }
    bool is_corner(int x, int y) const
    {
        return (x == 0 || x == width + 1) && (y == 0 || y == height + 1);
    }

    int count(TileKind k) const
    {
        return int(std::count(tiles.begin(), tiles.end(), k));
    }

    std::vector<std::pair<int, int>> tiles_of(TileKind k) const
    {
        std::vector<std::pair<int, int>> out;
        for (int y = 0; y < grid_height(); y++)
            for (int x = 0; x < grid_width(); x++)
                if (at(x, y) == k)
                    out.push_back({x, y});
        return out;
    }
};

// B_io = ceil(N_io / C_io); the one-per-side minimum is applied by the layout
// builders, not here.
inline int compute_io_blocks(int n_io, int c_io)
{
    if (c_io < 1)
        throw Error("InvalidCapacity", "c_io must be >= 1");
    if (n_io < 0)
        throw Error("InvalidCapacity", "n_io must be >= 0");
    return (n_io + c_io - 1) / c_io;
}

// Minimize (w+2)(h+2) over positive integers subject to w*h >= n_clb and
// 2(w+h) >= b_io. Ties break toward square fabrics (min |w-h|), then min w.
inline std::pair<int, int> solve_bounding_box(int n_clb, int b_io)
{
    if (n_clb < 1)
        throw Error("EmptyDesign", "n_clb must be >= 1");
    long best_cost = -1;
    int best_w = 0, best_h = 0;
    int w_max = std::max(n_clb, std::max(b_io, 1));
    for (int w = 1; w <= w_max; w++) {
        int h = (n_clb + w - 1) / w;
        int h_io = (b_io + 1) / 2 - w; // 2(w+h) >= b_io
        h = std::max({h, h_io, 1});
        long cost = long(w + 2) * (h + 2);
        if (best_cost < 0 || cost < best_cost ||
            (cost == best_cost && (std::abs(w - h) < std::abs(best_w - best_h) ||
                                   (std::abs(w - h) == std::abs(best_w - best_h) && w < best_w)))) {
            best_cost = cost;
            best_w = w;
            best_h = h;
        }
    }
    return {best_w, best_h};
}

namespace detail {

// Non-corner ring positions in clockwise order starting at (1,0).
inline std::vector<std::pair<int, int>> ring_positions(int w, int h)
{
    std::vector<std::pair<int, int>> out;
    for (int x = 1; x <= w; x++)
        out.push_back({x, 0});
    for (int y = 1; y <= h; y++)
        out.push_back({w + 1, y});
    for (int x = w; x >= 1; x--)
        out.push_back({x, h + 1});
    for (int y = h; y >= 1; y--)
        out.push_back({0, y});
    return out;
}

inline int side_of(const FabricLayout &l, int x, int y)
{
    if (y == 0)
        return 0;
    if (x == l.width + 1)
        return 1;
    if (y == l.height + 1)
        return 2;
    return 3;
}

// Pick `target` IO ring positions from `ranked` (already in preference order),
// guaranteeing at least one per side.
inline void place_io_tiles(FabricLayout &l, const std::vector<std::pair<int, int>> &ranked, int target)
{
    int needed = std::max(target, 4);
    if (needed > int(ranked.size()))
        throw Error("Infeasible", "ring too small for required IO tiles");
    std::set<std::pair<int, int>> chosen;
    for (int side = 0; side < 4; side++)
        for (const auto &p : ranked)
            if (side_of(l, p.first, p.second) == side) {
                chosen.insert(p);
                break;
            }
    for (const auto &p : ranked) {
        if (int(chosen.size()) >= needed)
            break;
        chosen.insert(p);
    }
    for (const auto &p : chosen)
        l.set(p.first, p.second, TileKind::Io);
}

} // namespace detail

inline FabricLayout make_blank_layout(int w, int h, const ArchTemplate &t, Strategy s)
{
    FabricLayout l;
    l.width = w;
    l.height = h;
    l.io_capacity = t.io_capacity;
    l.strategy = s;
    l.tiles.assign(size_t(w + 2) * (h + 2), TileKind::Empty);
    l.set(0, 0, TileKind::Corner);
    l.set(w + 1, 0, TileKind::Corner);
    l.set(0, h + 1, TileKind::Corner);
    l.set(w + 1, h + 1, TileKind::Corner);
    return l;
}

// The uniform baseline: every interior tile a CLB, every non-corner ring tile
// an IO tile.
inline FabricLayout make_uniform_layout(int w, int h, const ArchTemplate &t)
{
    FabricLayout l = make_blank_layout(w, h, t, Strategy::Uniform);
    for (int y = 1; y <= h; y++)
        for (int x = 1; x <= w; x++)
            l.set(x, y, TileKind::Clb);
    for (const auto &[x, y] : detail::ring_positions(w, h))
        l.set(x, y, TileKind::Io);
    for (int y = 1; y <= h; y++)
        for (int x = 1; x <= w; x++)
            l.relocation[{x, y}] = {x, y};
    return l;
}

// Conservative reduction: keep every used CLB at its original coordinate,
// empty the rest, and retain only the required IO tiles (nearest to the used
// logic, at least one per side).
inline FabricLayout conservative_layout(const UtilizationMap &u, const ArchTemplate &t)
{
    if (u.n_clb == 0)
        throw Error("EmptyDesign", "no used logic tiles");
    int w = u.grid_width - 2, h = u.grid_height - 2;
    FabricLayout l = make_blank_layout(w, h, t, Strategy::Conservative);
    for (const auto &[x, y] : u.used_clb_coords) {
        l.set(x, y, TileKind::Clb);
        l.relocation[{x, y}] = {x, y};
    }
    int b_io = compute_io_blocks(u.n_io, t.io_capacity);

    auto ring = detail::ring_positions(w, h);
    std::vector<std::pair<std::pair<int, size_t>, std::pair<int, int>>> ranked;
    for (size_t i = 0; i < ring.size(); i++) {
        int d = INT32_MAX;
        for (const auto &[cx, cy] : u.used_clb_coords)
            d = std::min(d, std::abs(cx - ring[i].first) + std::abs(cy - ring[i].second));
        ranked.push_back({{d, i}, ring[i]});
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::pair<int, int>> order;
    for (const auto &r : ranked)
        order.push_back(r.second);
    detail::place_io_tiles(l, order, b_io);
    return l;
}

// Layout compaction: relocate used CLBs row-major into the minimal bounding
// box, then fill IO tiles adjacency-first, remaining positions clockwise.
inline FabricLayout compact_layout(const UtilizationMap &u, const ArchTemplate &t)
{
    if (u.n_clb == 0)
        throw Error("EmptyDesign", "no used logic tiles");
    int b_io = compute_io_blocks(u.n_io, t.io_capacity);
    auto [w, h] = solve_bounding_box(u.n_clb, b_io);
    // corner exclusion is enforced at fill time; grow if the ring cannot hold
    // the demanded tiles
    while (2 * (w + h) < std::max(b_io, 4)) {
        if (w <= h)
            w++;
        else
            h++;
    }
    FabricLayout l = make_blank_layout(w, h, t, Strategy::Compact);

    std::vector<std::pair<int, int>> used(u.used_clb_coords.begin(), u.used_clb_coords.end());
    std::sort(used.begin(), used.end(),
              [](const auto &a, const auto &b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
    int i = 0;
    for (const auto &[ox, oy] : used) {
        int nx = 1 + i % w, ny = 1 + i / w;
        l.set(nx, ny, TileKind::Clb);
        l.relocation[{ox, oy}] = {nx, ny};
        i++;
    }

    auto ring = detail::ring_positions(w, h);
    auto adjacent_to_clb = [&](int x, int y) {
        static const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        for (int d = 0; d < 4; d++) {
            int ax = x + dx[d], ay = y + dy[d];
            if (ax >= 1 && ax <= w && ay >= 1 && ay <= h && l.at(ax, ay) == TileKind::Clb)
                return true;
        }
        return false;
    };
    std::vector<std::pair<int, int>> order;
    for (const auto &p : ring)
        if (adjacent_to_clb(p.first, p.second))
            order.push_back(p);
    for (const auto &p : ring)
        if (!adjacent_to_clb(p.first, p.second))
            order.push_back(p);
    detail::place_io_tiles(l, order, b_io);
    return l;
}

} // namespace nufab

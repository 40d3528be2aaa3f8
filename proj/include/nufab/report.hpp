#pragma once

#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nufab/errors.hpp"
#include "nufab/layout.hpp"
#include "nufab/placement.hpp"

namespace nufab {

// Per-tile-kind area coefficients (arbitrary area units per tile instance).
struct AreaModel {
    double clb = 0, io = 0, corner = 0, empty = 0;
    std::vector<double> residuals; // per calibration row, relative (signed)

    double of(TileKind k) const
    {
        switch (k) {
        case TileKind::Clb: return clb;
        case TileKind::Io: return io;
        case TileKind::Corner: return corner;
        case TileKind::Empty: return empty;
        }
        return 0;
    }
};

struct TileCounts {
    int clb = 0, io = 0, corner = 0, empty = 0;
};

inline TileCounts count_tiles(const FabricLayout &l)
{
    TileCounts c;
    for (int y = 0; y < l.grid_height(); y++)
        for (int x = 0; x < l.grid_width(); x++)
            switch (l.at(x, y)) {
            case TileKind::Clb: c.clb++; break;
            case TileKind::Io: c.io++; break;
            case TileKind::Corner: c.corner++; break;
            case TileKind::Empty: c.empty++; break;
            }
    return c;
}

inline double estimate_area(const FabricLayout &l, const AreaModel &m)
{
    TileCounts c = count_tiles(l);
    return c.clb * m.clb + c.io * m.io + c.corner * m.corner + c.empty * m.empty;
}

// One calibration observation: tile counts of a fabric plus its known area.
struct AreaSample {
    TileCounts counts;
    double area = 0;
};

namespace detail {

// least-squares solve over the selected columns via normal equations;
// returns false on a (near-)singular system
inline bool solve_normal(const std::vector<std::array<double, 4>> &rows, const std::vector<double> &rhs,
                         const std::vector<int> &cols, std::vector<double> &out)
{
    const size_t n = cols.size();
    std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0.0));
    for (size_t r = 0; r < rows.size(); r++)
        for (size_t i = 0; i < n; i++) {
            for (size_t j = 0; j < n; j++)
                M[i][j] += rows[r][cols[i]] * rows[r][cols[j]];
            M[i][n] += rows[r][cols[i]] * rhs[r];
        }
    for (size_t i = 0; i < n; i++) {
        size_t piv = i;
        for (size_t r = i + 1; r < n; r++)
            if (std::fabs(M[r][i]) > std::fabs(M[piv][i]))
                piv = r;
        std::swap(M[i], M[piv]);
        if (std::fabs(M[i][i]) < 1e-9)
            return false;
        for (size_t r = 0; r < n; r++) {
            if (r == i)
                continue;
            double f = M[r][i] / M[i][i];
            for (size_t c = i; c <= n; c++)
                M[r][c] -= f * M[i][c];
        }
    }
    out.assign(n, 0.0);
    for (size_t i = 0; i < n; i++)
        out[i] = M[i][n] / M[i][i];
    return true;
}

} // namespace detail

// Non-negative least-squares fit of the four coefficients from measured
// fabrics. Tile kinds absent from every sample cannot be estimated and get
// coefficient 0; columns whose unconstrained solution turns negative are
// dropped one at a time (active-set style) and refit. The reduced system must
// be solvable (enough independent rows) or SingularSystem is raised.
inline AreaModel calibrate_area_model(const std::vector<AreaSample> &samples)
{
    std::vector<std::array<double, 4>> rows;
    std::vector<double> rhs;
    for (const auto &s : samples) {
        rows.push_back({double(s.counts.clb), double(s.counts.io), double(s.counts.corner), double(s.counts.empty)});
        rhs.push_back(s.area);
    }

    std::array<bool, 4> present{};
    for (const auto &r : rows)
        for (int k = 0; k < 4; k++)
            if (r[k] != 0)
                present[k] = true;
    std::vector<int> cols;
    for (int k = 0; k < 4; k++)
        if (present[k])
            cols.push_back(k);
    if (rows.size() < cols.size())
        throw Error("SingularSystem", "need at least " + std::to_string(cols.size()) + " samples, got " +
                                          std::to_string(rows.size()));

    std::vector<double> sol;
    while (!cols.empty()) {
        if (!detail::solve_normal(rows, rhs, cols, sol))
            throw Error("SingularSystem", "dependent calibration samples");
        size_t worst = cols.size();
        double worst_v = -1e-12;
        for (size_t i = 0; i < cols.size(); i++)
            if (sol[i] < worst_v) {
                worst_v = sol[i];
                worst = i;
            }
        if (worst == cols.size())
            break;
        cols.erase(cols.begin() + long(worst));
    }

    std::array<double, 4> x{};
    for (size_t i = 0; i < cols.size(); i++)
        x[cols[i]] = std::max(0.0, sol[i]);
    AreaModel m{x[0], x[1], x[2], x[3], {}};
    for (size_t r = 0; r < rows.size(); r++) {
        double pred = 0;
        for (int k = 0; k < 4; k++)
            pred += rows[r][k] * x[k];
        m.residuals.push_back(rhs[r] != 0 ? (pred - rhs[r]) / rhs[r] : pred);
    }
    return m;
}

// Relative area change in percent, negative when `reduced` is smaller.
inline double delta_area(double baseline, double reduced)
{
    return (reduced - baseline) / baseline * 100.0;
}

struct UtilizationStats {
    int used_clb = 0, total_clb = 0;
    int used_io = 0, total_io_pads = 0;
    double clb_util = 0, io_util = 0;
};

inline UtilizationStats utilization_stats(const FabricLayout &l, const UtilizationMap &u)
{
    UtilizationStats s;
    TileCounts c = count_tiles(l);
    s.total_clb = c.clb;
    s.total_io_pads = c.io * l.io_capacity;
    s.used_clb = u.n_clb;
    s.used_io = u.n_io;
    if (s.total_clb > 0)
        s.clb_util = double(s.used_clb) / s.total_clb;
    if (s.total_io_pads > 0)
        s.io_util = double(s.used_io) / s.total_io_pads;
    return s;
}

// Per-tile BLE occupancy averaged two ways: over every logic tile of the
// layout (removed/empty tiles count as 0) and over occupied tiles only.
// Compaction removes unused tiles, so its all-tile average rises toward the
// occupied-only average.
struct UtilAverages {
    double over_all_tiles = 0;
    double over_occupied = 0;
};

inline UtilAverages utilization_averages(const UtilizationMap &u, const FabricLayout &l, const ArchTemplate &t)
{
    UtilAverages a;
    double sum = 0;
    int occupied = 0;
    for (const auto &[xy, cnt] : u.per_tile_ble_usage)
        if (cnt > 0) {
            sum += std::min(cnt, t.n_ble) / double(t.n_ble);
            occupied++;
        }
    int all = count_tiles(l).clb;
    if (all > 0)
        a.over_all_tiles = sum / all;
    if (occupied > 0)
        a.over_occupied = sum / occupied;
    return a;
}

// One row of a flow summary (benchmark x strategy), serializable as CSV.
struct FlowRow {
    std::string design;
    std::string strategy;
    int width = 0, height = 0;
    TileCounts counts;
    int config_bits = 0;
    UtilizationStats util;
    double area = 0;
    double delta_vs_uniform = 0; // percent
};

inline void write_flow_csv(const std::vector<FlowRow> &rows, std::ostream &os)
{
    os << "design,strategy,width,height,clb_tiles,io_tiles,corner_tiles,empty_tiles,"
          "config_bits,used_clb,used_io,clb_util,io_util,area,delta_vs_uniform_pct\n";
    for (const auto &r : rows) {
        os << r.design << ',' << r.strategy << ',' << r.width << ',' << r.height << ',' << r.counts.clb << ','
           << r.counts.io << ',' << r.counts.corner << ',' << r.counts.empty << ',' << r.config_bits << ','
           << r.util.used_clb << ',' << r.util.used_io << ',' << std::fixed << std::setprecision(4) << r.util.clb_util
           << ',' << r.util.io_util << ',' << std::setprecision(2) << r.area << ',' << r.delta_vs_uniform << "\n";
        os.unsetf(std::ios::fixed);
        os << std::setprecision(6);
    }
}

} // namespace nufab

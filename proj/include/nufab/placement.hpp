#pragma once

#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nufab/errors.hpp"

namespace nufab {

struct PlaceEntry {
    std::string name;
    int x = 0;
    int y = 0;
    int subtile = 0;

    bool operator==(const PlaceEntry &) const = default;
};

// Parsed VPR-style placement: grid dimensions include the IO ring.
struct Placement {
    int grid_width = 0;
    int grid_height = 0;
    std::vector<PlaceEntry> entries;

    bool operator==(const Placement &) const = default;
};

enum class BlockClass { Clb, Io };

struct UtilizationMap {
    int n_clb = 0; // occupied interior logic tiles
    int n_io = 0;  // placed IO pins
    int grid_width = 0;
    int grid_height = 0;
    std::set<std::pair<int, int>> used_clb_coords;
    std::set<std::tuple<int, int, int>> io_coords; // (x, y, subtile)
    std::map<std::pair<int, int>, int> per_tile_ble_usage;
};

// Parse a `.place` file: a header `Array size: W x H logic blocks` followed by
// data lines `name x y subtile [#index]`. Comment and bookkeeping lines
// (`#...`, `Netlist...`, column headers) are skipped by prefix.
inline Placement parse_place(std::istream &in)
{
    Placement p;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    auto where = [&] { return "line " + std::to_string(lineno); };

    while (std::getline(in, line)) {
        lineno++;
        if (auto h = line.find('#'); h != std::string::npos)
            line = line.substr(0, h);
        std::istringstream is(line);
        std::vector<std::string> toks;
        std::string t;
        while (is >> t)
            toks.push_back(t);
        if (toks.empty())
            continue;
        if (!have_header) {
            if (toks[0].rfind("Netlist", 0) == 0 || toks[0] == "block" || toks[0] == "----------")
                continue;
            // Array size: W x H logic blocks
            if (line.find("Array size:") != std::string::npos) {
                std::size_t pos = line.find("Array size:") + 11;
                std::istringstream hs(line.substr(pos));
                std::string xtok;
                if (!(hs >> p.grid_width >> xtok >> p.grid_height) || xtok != "x")
                    throw SyntaxError("malformed array size header", where());
                if (p.grid_width <= 0 || p.grid_height <= 0)
                    throw SyntaxError("non-positive array dimension", where());
                have_header = true;
                continue;
            }
            throw SyntaxError("expected Array size header", where());
        }
        if (toks[0].rfind("Netlist", 0) == 0 || toks[0] == "block" || toks[0] == "----------")
            continue;
        if (toks.size() < 4)
            throw SyntaxError("data line needs name x y subtile", where());
        PlaceEntry e;
        e.name = toks[0];
        try {
            e.x = std::stoi(toks[1]);
            e.y = std::stoi(toks[2]);
            e.subtile = std::stoi(toks[3]);
        } catch (const std::exception &) {
            throw SyntaxError("non-integer coordinate", where());
        }
        if (e.x < 0 || e.x >= p.grid_width || e.y < 0 || e.y >= p.grid_height)
            throw RangeError("coordinate outside array", where());
        p.entries.push_back(e);
    }
    if (!have_header)
        throw SyntaxError("missing Array size header");

    std::set<std::tuple<int, int, int>> seen;
    for (const auto &e : p.entries)
        if (!seen.insert({e.x, e.y, e.subtile}).second)
            throw SemanticError("duplicate placement at (" + std::to_string(e.x) + "," + std::to_string(e.y) + "," +
                                std::to_string(e.subtile) + ")");
    return p;
}

inline Placement parse_place(const std::string &text)
{
    std::istringstream is(text);
    return parse_place(is);
}

// Test/flow helper emitting the same format parse_place consumes.
inline void write_place(const Placement &p, std::ostream &os)
{
    os << "Array size: " << p.grid_width << " x " << p.grid_height << " logic blocks\n\n";
    os << "#block name\tx\ty\tsubblk\n";
    int idx = 0;
    for (const auto &e : p.entries)
        os << e.name << "\t" << e.x << "\t" << e.y << "\t" << e.subtile << "\t#" << idx++ << "\n";
}

inline std::string write_place(const Placement &p)
{
    std::ostringstream os;
    write_place(p, os);
    return os.str();
}

inline bool is_perimeter(const Placement &p, int x, int y)
{
    return x == 0 || y == 0 || x == p.grid_width - 1 || y == p.grid_height - 1;
}

// Default classifier: perimeter coordinates are IO, interior ones CLB.
inline BlockClass classify_by_position(const Placement &p, const PlaceEntry &e)
{
    return is_perimeter(p, e.x, e.y) ? BlockClass::Io : BlockClass::Clb;
}

inline UtilizationMap
extract_utilization(const Placement &p,
                    const std::function<BlockClass(const PlaceEntry &)> &classifier = nullptr)
{
    UtilizationMap u;
    u.grid_width = p.grid_width;
    u.grid_height = p.grid_height;
    for (const auto &e : p.entries) {
        BlockClass c = classifier ? classifier(e) : classify_by_position(p, e);
        bool interior = !is_perimeter(p, e.x, e.y);
        if (c == BlockClass::Clb) {
            if (!interior)
                throw Error("ClassifierConflict", "perimeter tile classified CLB at (" + std::to_string(e.x) + "," +
                                                      std::to_string(e.y) + ")");
            u.used_clb_coords.insert({e.x, e.y});
            u.per_tile_ble_usage[{e.x, e.y}]++;
        } else {
            if (interior)
                throw Error("ClassifierConflict", "interior tile classified IO at (" + std::to_string(e.x) + "," +
                                                      std::to_string(e.y) + ")");
            u.io_coords.insert({e.x, e.y, e.subtile});
            u.n_io++;
        }
    }
    u.n_clb = int(u.used_clb_coords.size());
    return u;
}

} // namespace nufab

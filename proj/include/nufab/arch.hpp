#pragma once

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nufab/layout.hpp"
#include "nufab/rng.hpp"
#include "nufab/xml.hpp"

namespace nufab {

// Per-CLB-tile permutation of the N_ble*K BLE input positions. Derived
// deterministically from (fabric seed, x, y).
struct PinMap {
    std::map<std::pair<int, int>, std::vector<int>> perm;

    bool operator==(const PinMap &) const = default;
};

struct Segment {
    std::string name;
    int length = 1;
    int tracks = 0;

    bool operator==(const Segment &) const = default;
};

struct SegmentSpec {
    int w_ch = 8;
    std::vector<Segment> segments;

    bool operator==(const SegmentSpec &) const = default;

    // length of track t; tracks are laid out segment-list order
    int track_length(int t) const
    {
        for (const auto &s : segments) {
            if (t < s.tracks)
                return s.length;
            t -= s.tracks;
        }
        throw RangeError("track index out of range");
    }
};

// One Fisher-Yates permutation per CLB tile, keyed by (seed, x, y).
inline PinMap build_pin_map(const FabricLayout &layout, uint64_t seed, int n_pins)
{
    PinMap pm;
    for (const auto &[x, y] : layout.tiles_of(TileKind::Clb)) {
        Rng rng(seed, (uint64_t(uint32_t(x)) << 32) | uint32_t(y));
        std::vector<int> p(n_pins);
        for (int i = 0; i < n_pins; i++)
            p[i] = i;
        for (int i = n_pins - 1; i > 0; i--)
            std::swap(p[i], p[rng.below(uint64_t(i) + 1)]);
        pm.perm[{x, y}] = std::move(p);
    }
    return pm;
}

// Split w_ch tracks into L1 and L4 shares; `mix` is the L1 fraction.
inline SegmentSpec build_segments(int w_ch, double mix)
{
    if (w_ch < 2 || w_ch % 2 != 0)
        throw Error("InvalidWidth", "channel width must be even and >= 2");
    if (mix < 0.0 || mix > 1.0)
        throw Error("InvalidWidth", "mix must be in [0,1]");
    SegmentSpec s;
    s.w_ch = w_ch;
    int n_l1 = int(mix * w_ch);
    if (n_l1 > 0)
        s.segments.push_back({"L1", 1, n_l1});
    if (w_ch - n_l1 > 0)
        s.segments.push_back({"L4", 4, w_ch - n_l1});
    return s;
}

namespace detail {

inline const char *tile_type_name(TileKind k)
{
    switch (k) {
    case TileKind::Clb: return "clb";
    case TileKind::Io: return "io";
    case TileKind::Corner: return "corner";
    case TileKind::Empty: return "empty";
    }
    return "?";
}

} // namespace detail

// Emit the architecture description: fixed_layout singles for every non-EMPTY
// tile, the segment list, tile definitions, per-tile pin orderings, and the
// generation metadata needed to reconstruct the layout. Output is
// byte-deterministic: tiles ordered by (y,x), attributes alphabetical.
inline std::string emit_arch_xml(const FabricLayout &layout, const PinMap &pins, const SegmentSpec &segs,
                                 const ArchTemplate &t)
{
    if (int(layout.tiles.size()) != layout.grid_width() * layout.grid_height())
        throw Error("SerializationError", "layout tile grid size mismatch");
    std::ostringstream os;
    os << "<architecture>\n";
    os << "  <tiles>\n";
    os << "    <tile capacity=\"" << t.io_capacity << "\" name=\"io\"/>\n";
    os << "    <tile inputs=\"" << t.clb_inputs << "\" k=\"" << t.k << "\" n_ble=\"" << t.n_ble
       << "\" name=\"clb\"/>\n";
    os << "  </tiles>\n";
    os << "  <layout>\n";
    os << "    <fixed_layout height=\"" << layout.grid_height() << "\" name=\"" << strategy_name(layout.strategy)
       << "\" width=\"" << layout.grid_width() << "\">\n";
    for (int y = 0; y < layout.grid_height(); y++)
        for (int x = 0; x < layout.grid_width(); x++) {
            TileKind k = layout.at(x, y);
            if (k == TileKind::Empty)
                continue; // grid default
            os << "      <single priority=\"1\" type=\"" << detail::tile_type_name(k) << "\" x=\"" << x << "\" y=\""
               << y << "\"/>\n";
        }
    os << "    </fixed_layout>\n";
    os << "  </layout>\n";
    os << "  <segmentlist>\n";
    for (const auto &s : segs.segments)
        os << "    <segment length=\"" << s.length << "\" name=\"" << s.name << "\" tracks=\"" << s.tracks
           << "\"/>\n";
    os << "  </segmentlist>\n";
    os << "  <device fc_in=\"" << t.fc_in << "\" fc_out=\"" << t.fc_out << "\" switch_block=\"disjoint\" w_ch=\""
       << t.w_ch << "\"/>\n";
    os << "  <pinmaps seed=\"" << t.seed << "\">\n";
    for (const auto &[coord, perm] : pins.perm) {
        os << "    <tile_pins order=\"";
        for (size_t i = 0; i < perm.size(); i++)
            os << (i ? "," : "") << perm[i];
        os << "\" x=\"" << coord.first << "\" y=\"" << coord.second << "\"/>\n";
    }
    os << "  </pinmaps>\n";
    os << "  <relocation>\n";
    for (const auto &[from, to] : layout.relocation)
        os << "    <map nx=\"" << to.first << "\" ny=\"" << to.second << "\" ox=\"" << from.first << "\" oy=\""
           << from.second << "\"/>\n";
    os << "  </relocation>\n";
    os << "</architecture>\n";
    return os.str();
}

struct ArchFile {
    FabricLayout layout;
    PinMap pins;
    SegmentSpec segments;
    ArchTemplate tmpl;
};

inline ArchFile parse_arch_xml(const std::string &text)
{
    ArchFile a;
    xml::Node root = xml::parse(text);
    if (root.name != "architecture")
        throw SyntaxError("expected <architecture> root");

    for (const auto &tile : root.get("tiles").children) {
        if (tile.attr("name") == "io")
            a.tmpl.io_capacity = tile.iattr("capacity");
        else if (tile.attr("name") == "clb") {
            a.tmpl.clb_inputs = tile.iattr("inputs");
            a.tmpl.k = tile.iattr("k");
            a.tmpl.n_ble = tile.iattr("n_ble");
        }
    }

    const xml::Node &fl = root.get("layout").get("fixed_layout");
    int gw = fl.iattr("width"), gh = fl.iattr("height");
    if (gw < 3 || gh < 3)
        throw SyntaxError("fixed_layout grid too small");
    Strategy strat = Strategy::Uniform;
    std::string sname = fl.attr("name");
    if (sname == "conservative")
        strat = Strategy::Conservative;
    else if (sname == "compact")
        strat = Strategy::Compact;
    a.layout = make_blank_layout(gw - 2, gh - 2, a.tmpl, strat);
    // blank corners get overwritten below; reset ring empties
    for (auto &tk : a.layout.tiles)
        tk = TileKind::Empty;
    for (const auto &single : fl.children) {
        if (single.name != "single")
            throw SyntaxError("unexpected element <" + single.name + "> in fixed_layout");
        int x = single.iattr("x"), y = single.iattr("y");
        if (x < 0 || x >= gw || y < 0 || y >= gh)
            throw RangeError("single outside grid");
        std::string type = single.attr("type");
        TileKind k;
        if (type == "clb") k = TileKind::Clb;
        else if (type == "io") k = TileKind::Io;
        else if (type == "corner") k = TileKind::Corner;
        else throw SyntaxError("unknown tile type " + type);
        a.layout.set(x, y, k);
    }
    a.layout.io_capacity = a.tmpl.io_capacity;

    const xml::Node &sl = root.get("segmentlist");
    const xml::Node &dev = root.get("device");
    a.tmpl.fc_in = std::stod(dev.attr("fc_in"));
    a.tmpl.fc_out = std::stod(dev.attr("fc_out"));
    a.tmpl.w_ch = dev.iattr("w_ch");
    a.segments.w_ch = a.tmpl.w_ch;
    for (const auto &seg : sl.children)
        a.segments.segments.push_back({seg.attr("name"), seg.iattr("length"), seg.iattr("tracks")});
    double mix_tracks = 0;
    for (const auto &s : a.segments.segments)
        if (s.length == 1)
            mix_tracks += s.tracks;
    a.tmpl.l1_mix = a.tmpl.w_ch ? mix_tracks / a.tmpl.w_ch : 0.0;

    const xml::Node &pm = root.get("pinmaps");
    a.tmpl.seed = std::stoull(pm.attr("seed"));
    for (const auto &tp : pm.children) {
        std::vector<int> perm;
        std::istringstream ps(tp.attr("order"));
        std::string tok;
        while (std::getline(ps, tok, ','))
            perm.push_back(std::stoi(tok));
        a.pins.perm[{tp.iattr("x"), tp.iattr("y")}] = std::move(perm);
    }

    if (const xml::Node *rel = root.find("relocation"))
        for (const auto &m : rel->children)
            a.layout.relocation[{m.iattr("ox"), m.iattr("oy")}] = {m.iattr("nx"), m.iattr("ny")};
    return a;
}

} // namespace nufab

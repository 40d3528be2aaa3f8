#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "nufab/arch.hpp"
#include "nufab/layout.hpp"

namespace nufab {

enum class Resource { Lut, Bypass, Crossbar, ClbIpin, PadIpin, Wire };

inline const char *resource_name(Resource r)
{
    switch (r) {
    case Resource::Lut: return "lut";
    case Resource::Bypass: return "bypass";
    case Resource::Crossbar: return "crossbar";
    case Resource::ClbIpin: return "clb_ipin";
    case Resource::PadIpin: return "pad_ipin";
    case Resource::Wire: return "wire";
    }
    return "?";
}

struct ConfigBit {
    int id = -1; // dense structural index
    Resource res = Resource::Wire;
    int x = 0, y = 0; // owner tile
    int local = 0;    // bit index within the owning resource group
    int chain_pos = -1;
};

enum class NodeKind { ClbOpin, ClbIpin, PadIn, PadOut, Wire };

// Routing-resource node. Wires carry their channel identity; pins carry their
// tile and index. `mux` indexes the programmable mux driving the node (-1 for
// source nodes).
struct RNode {
    NodeKind kind = NodeKind::Wire;
    int x = 0, y = 0; // tile (pins) or owner tile (wires)
    int idx = 0;      // pin index or pad subtile
    int orient = 0, boundary = 0, track = 0, start = 0, end = 0; // wires only
    int sig = -1;
    int mux = -1;
};

struct MuxElem {
    Resource res = Resource::Wire;
    int x = 0, y = 0, local = 0;
    int out_sig = -1;
    std::vector<int> in_sigs;
    std::vector<int> in_nodes; // parallel to in_sigs; -1 for non-routing muxes
    int cfg_base = -1;
    int cfg_width = 0;

    int width_for_arity() const
    {
        int w = 0;
        while ((1 << w) < int(in_sigs.size()))
            w++;
        return in_sigs.size() <= 1 ? 0 : w;
    }
};

struct LutElem {
    int x = 0, y = 0, ble = 0;
    std::vector<int> in_sigs;
    int out_sig = -1;
    int cfg_base = -1;
};

struct DffElem {
    int x = 0, y = 0, ble = 0;
    int d_sig = -1, q_sig = -1;
};

enum class DriverKind { None, Mux, Lut, DffQ, PadIn };

struct Driver {
    DriverKind kind = DriverKind::None;
    int idx = -1;
};

struct ClbSite {
    std::vector<int> ipin_nodes;  // I routing nodes
    std::vector<int> opin_nodes;  // N_ble routing nodes
    std::vector<int> xbar_mux;    // N_ble*K mux indices
    std::vector<int> lut_idx;     // N_ble
    std::vector<int> bypass_mux;  // N_ble
    std::vector<int> dff_idx;     // N_ble
    std::vector<int> ble_out_sig; // N_ble
};

struct IoSite {
    std::vector<int> pad_in_nodes;  // fabric inputs (one per subtile)
    std::vector<int> pad_out_nodes; // fabric outputs
};

// Elaborated gate-level fabric: BLEs, crossbars, connection/switch boxes,
// their configuration bits, and the scan-chain order of those bits.
struct FabricModel {
    ArchTemplate tmpl;
    FabricLayout layout;
    PinMap pins;
    SegmentSpec segs;

    int n_signals = 0;
    std::vector<RNode> nodes;
    std::vector<MuxElem> muxes;
    std::vector<LutElem> luts;
    std::vector<DffElem> dffs;
    std::vector<Driver> driver; // per signal

    std::map<std::pair<int, int>, ClbSite> clbs;
    std::map<std::pair<int, int>, IoSite> ios;

    std::vector<ConfigBit> config_bits;
    std::vector<int> chain_order; // bit id at each chain position
    std::vector<int> chain_next;  // successor bit id, -1 at tail

    int scan_head() const { return chain_order.empty() ? -1 : chain_order.front(); }
    int scan_tail() const { return chain_order.empty() ? -1 : chain_order.back(); }
};

inline int count_config_bits(const FabricModel &f) { return int(f.config_bits.size()); }

namespace detail {

struct WireKey {
    int orient, boundary, track, start;
    auto operator<=>(const WireKey &) const = default;
};

} // namespace detail

inline FabricModel elaborate(const FabricLayout &layout, const PinMap &pins, const SegmentSpec &segs,
                             const ArchTemplate &t)
{
    FabricModel f;
    f.tmpl = t;
    f.layout = layout;
    f.pins = pins;
    f.segs = segs;

    const int W = layout.width, H = layout.height;
    const int wch = t.w_ch, K = t.k, N = t.n_ble, I = t.clb_inputs;

    auto new_sig = [&] { return f.n_signals++; };

    std::map<detail::WireKey, int> wire_node;

    auto chan_len = [&](int orient) { return orient == 0 ? W + 2 : H + 2; };
    auto n_boundaries = [&](int orient) { return orient == 0 ? H + 1 : W + 1; };

    // wire nodes, one mux each
    for (int orient = 0; orient < 2; orient++)
        for (int b = 0; b < n_boundaries(orient); b++)
            for (int tk = 0; tk < wch; tk++) {
                int len = segs.track_length(tk);
                for (int start = 0; start < chan_len(orient); start += len) {
                    RNode n;
                    n.kind = NodeKind::Wire;
                    n.orient = orient;
                    n.boundary = b;
                    n.track = tk;
                    n.start = start;
                    n.end = std::min(start + len - 1, chan_len(orient) - 1);
                    // owner tile: (start, boundary) for H, (boundary, start) for V
                    n.x = orient == 0 ? start : b;
                    n.y = orient == 0 ? b : start;
                    n.sig = new_sig();
                    MuxElem m;
                    m.res = Resource::Wire;
                    m.x = n.x;
                    m.y = n.y;
                    m.out_sig = n.sig;
                    n.mux = int(f.muxes.size());
                    f.muxes.push_back(std::move(m));
                    wire_node[{orient, b, tk, start}] = int(f.nodes.size());
                    f.nodes.push_back(n);
                }
            }

    auto wire_at = [&](int orient, int b, int tk, int pos) -> int {
        int len = segs.track_length(tk);
        auto it = wire_node.find({orient, b, tk, (pos / len) * len});
        return it == wire_node.end() ? -1 : it->second;
    };

    auto add_mux_input = [&](int mux_idx, int sig, int node) {
        MuxElem &m = f.muxes[mux_idx];
        for (int s : m.in_sigs)
            if (s == sig)
                return;
        m.in_sigs.push_back(sig);
        m.in_nodes.push_back(node);
    };

    // adjacent channels of a tile in fixed order: below, above, left, right;
    // each entry is (orient, boundary, position)
    auto adjacent_channels = [&](int x, int y) {
        std::vector<std::array<int, 3>> out;
        if (y - 1 >= 0 && y - 1 <= H)
            out.push_back({0, y - 1, x});
        if (y >= 0 && y <= H)
            out.push_back({0, y, x});
        if (x - 1 >= 0 && x - 1 <= W)
            out.push_back({1, x - 1, y});
        if (x >= 0 && x <= W)
            out.push_back({1, x, y});
        return out;
    };

    // tile sites
    for (int y = 0; y < layout.grid_height(); y++)
        for (int x = 0; x < layout.grid_width(); x++) {
            TileKind kind = layout.at(x, y);
            if (kind == TileKind::Clb) {
                ClbSite site;
                for (int p = 0; p < I; p++) {
                    RNode n;
                    n.kind = NodeKind::ClbIpin;
                    n.x = x;
                    n.y = y;
                    n.idx = p;
                    n.sig = new_sig();
                    MuxElem m;
                    m.res = Resource::ClbIpin;
                    m.x = x;
                    m.y = y;
                    m.local = p;
                    m.out_sig = n.sig;
                    n.mux = int(f.muxes.size());
                    f.muxes.push_back(std::move(m));
                    site.ipin_nodes.push_back(int(f.nodes.size()));
                    f.nodes.push_back(n);
                }
                for (int b = 0; b < N; b++)
                    site.ble_out_sig.push_back(new_sig());
                for (int b = 0; b < N; b++) {
                    RNode n;
                    n.kind = NodeKind::ClbOpin;
                    n.x = x;
                    n.y = y;
                    n.idx = b;
                    n.sig = site.ble_out_sig[b];
                    site.opin_nodes.push_back(int(f.nodes.size()));
                    f.nodes.push_back(n);
                }
                // full crossbar: (I ipins + N feedback) -> each of the N*K BLE inputs
                for (int m_i = 0; m_i < N * K; m_i++) {
                    MuxElem m;
                    m.res = Resource::Crossbar;
                    m.x = x;
                    m.y = y;
                    m.local = m_i;
                    m.out_sig = new_sig();
                    for (int p = 0; p < I; p++) {
                        m.in_sigs.push_back(f.nodes[site.ipin_nodes[p]].sig);
                        m.in_nodes.push_back(-1);
                    }
                    for (int b = 0; b < N; b++) {
                        m.in_sigs.push_back(site.ble_out_sig[b]);
                        m.in_nodes.push_back(-1);
                    }
                    site.xbar_mux.push_back(int(f.muxes.size()));
                    f.muxes.push_back(std::move(m));
                }
                const std::vector<int> &perm = pins.perm.at({x, y});
                for (int b = 0; b < N; b++) {
                    LutElem lut;
                    lut.x = x;
                    lut.y = y;
                    lut.ble = b;
                    for (int k = 0; k < K; k++)
                        lut.in_sigs.push_back(f.muxes[site.xbar_mux[perm.at(size_t(b) * K + k)]].out_sig);
                    lut.out_sig = new_sig();
                    site.lut_idx.push_back(int(f.luts.size()));
                    f.luts.push_back(lut);

                    DffElem dff;
                    dff.x = x;
                    dff.y = y;
                    dff.ble = b;
                    dff.d_sig = lut.out_sig;
                    dff.q_sig = new_sig();
                    site.dff_idx.push_back(int(f.dffs.size()));
                    f.dffs.push_back(dff);

                    MuxElem bypass;
                    bypass.res = Resource::Bypass;
                    bypass.x = x;
                    bypass.y = y;
                    bypass.local = b;
                    bypass.out_sig = site.ble_out_sig[b];
                    bypass.in_sigs = {lut.out_sig, dff.q_sig};
                    bypass.in_nodes = {-1, -1};
                    site.bypass_mux.push_back(int(f.muxes.size()));
                    f.muxes.push_back(std::move(bypass));
                }
                f.clbs[{x, y}] = std::move(site);
            } else if (kind == TileKind::Io) {
                IoSite site;
                for (int s = 0; s < layout.io_capacity; s++) {
                    RNode pin;
                    pin.kind = NodeKind::PadIn;
                    pin.x = x;
                    pin.y = y;
                    pin.idx = s;
                    pin.sig = new_sig();
                    site.pad_in_nodes.push_back(int(f.nodes.size()));
                    f.nodes.push_back(pin);

                    RNode pout;
                    pout.kind = NodeKind::PadOut;
                    pout.x = x;
                    pout.y = y;
                    pout.idx = s;
                    pout.sig = new_sig();
                    MuxElem m;
                    m.res = Resource::PadIpin;
                    m.x = x;
                    m.y = y;
                    m.local = s;
                    m.out_sig = pout.sig;
                    pout.mux = int(f.muxes.size());
                    f.muxes.push_back(std::move(m));
                    site.pad_out_nodes.push_back(int(f.nodes.size()));
                    f.nodes.push_back(pout);
                }
                f.ios[{x, y}] = std::move(site);
            }
        }

    // switch boxes: disjoint pattern, same-track segments meeting at a channel
    // junction are pairwise connectable
    for (int i = 0; i <= W; i++)
        for (int j = 0; j <= H; j++)
            for (int tk = 0; tk < wch; tk++) {
                std::vector<int> touching;
                auto add = [&](int n) {
                    if (n >= 0 && std::find(touching.begin(), touching.end(), n) == touching.end())
                        touching.push_back(n);
                };
                add(wire_at(0, j, tk, i));
                add(wire_at(0, j, tk, i + 1));
                add(wire_at(1, i, tk, j));
                add(wire_at(1, i, tk, j + 1));
                for (int a : touching)
                    for (int b : touching)
                        if (a != b)
                            add_mux_input(f.nodes[b].mux, f.nodes[a].sig, a);
            }

    int fc_in_cnt = std::max(1, int(t.fc_in * wch + 0.5));
    int fc_out_cnt = std::max(1, int(t.fc_out * wch + 0.5));
    int stride_in = std::max(1, wch / fc_in_cnt);
    int stride_out = std::max(1, wch / fc_out_cnt);

    // connection boxes: OPIN taps first (tiles in (y,x) order), then IPIN taps
    for (int y = 0; y < layout.grid_height(); y++)
        for (int x = 0; x < layout.grid_width(); x++) {
            auto chans = adjacent_channels(x, y);
            if (auto it = f.clbs.find({x, y}); it != f.clbs.end()) {
                for (int b = 0; b < N; b++)
                    for (size_t c = 0; c < chans.size(); c++)
                        for (int j = 0; j < fc_out_cnt; j++) {
                            int tk = (b + int(c) + j * stride_out) % wch;
                            int wn = wire_at(chans[c][0], chans[c][1], tk, chans[c][2]);
                            if (wn >= 0)
                                add_mux_input(f.nodes[wn].mux, f.nodes[it->second.opin_nodes[b]].sig,
                                              it->second.opin_nodes[b]);
                        }
            } else if (auto io = f.ios.find({x, y}); io != f.ios.end()) {
                for (int s = 0; s < layout.io_capacity; s++)
                    for (size_t c = 0; c < chans.size(); c++)
                        for (int j = 0; j < fc_out_cnt; j++) {
                            int tk = (s + int(c) + j * stride_out) % wch;
                            int wn = wire_at(chans[c][0], chans[c][1], tk, chans[c][2]);
                            if (wn >= 0)
                                add_mux_input(f.nodes[wn].mux, f.nodes[io->second.pad_in_nodes[s]].sig,
                                              io->second.pad_in_nodes[s]);
                        }
            }
        }
    for (int y = 0; y < layout.grid_height(); y++)
        for (int x = 0; x < layout.grid_width(); x++) {
            auto chans = adjacent_channels(x, y);
            if (auto it = f.clbs.find({x, y}); it != f.clbs.end()) {
                for (int p = 0; p < I; p++)
                    for (size_t c = 0; c < chans.size(); c++)
                        for (int j = 0; j < fc_in_cnt; j++) {
                            int tk = (p + int(c) + j * stride_in) % wch;
                            int wn = wire_at(chans[c][0], chans[c][1], tk, chans[c][2]);
                            if (wn >= 0)
                                add_mux_input(f.nodes[it->second.ipin_nodes[p]].mux, f.nodes[wn].sig, wn);
                        }
            } else if (auto io = f.ios.find({x, y}); io != f.ios.end()) {
                for (int s = 0; s < layout.io_capacity; s++)
                    for (size_t c = 0; c < chans.size(); c++)
                        for (int j = 0; j < fc_in_cnt; j++) {
                            int tk = (s + int(c) + j * stride_in) % wch;
                            int wn = wire_at(chans[c][0], chans[c][1], tk, chans[c][2]);
                            if (wn >= 0)
                                add_mux_input(f.nodes[io->second.pad_out_nodes[s]].mux, f.nodes[wn].sig, wn);
                        }
            }
        }

    // configuration bits in scan order: serpentine over columns, within a tile
    // LUT bits, bypass, crossbar, then routing bits (pin muxes, owned wires)
    auto emit_bits = [&](Resource res, int x, int y, int count, int *base_out) {
        *base_out = int(f.config_bits.size());
        for (int i = 0; i < count; i++) {
            ConfigBit cb;
            cb.id = int(f.config_bits.size());
            cb.res = res;
            cb.x = x;
            cb.y = y;
            cb.local = i;
            cb.chain_pos = cb.id; // structural order *is* the chain order
            f.config_bits.push_back(cb);
        }
    };
    auto emit_mux_bits = [&](int mux_idx) {
        MuxElem &m = f.muxes[mux_idx];
        m.cfg_width = m.width_for_arity();
        emit_bits(m.res, m.x, m.y, m.cfg_width, &m.cfg_base);
    };

    // wires grouped by owner tile, H before V, then (track, start)
    std::map<std::pair<int, int>, std::vector<int>> owned_wires;
    for (size_t n = 0; n < f.nodes.size(); n++)
        if (f.nodes[n].kind == NodeKind::Wire)
            owned_wires[{f.nodes[n].x, f.nodes[n].y}].push_back(int(n));
    for (auto &[coord, list] : owned_wires)
        std::sort(list.begin(), list.end(), [&](int a, int b) {
            const RNode &na = f.nodes[a], &nb = f.nodes[b];
            return std::tie(na.orient, na.boundary, na.track, na.start) <
                   std::tie(nb.orient, nb.boundary, nb.track, nb.start);
        });

    for (int x = 0; x < layout.grid_width(); x++) {
        bool down = (x % 2) != 0;
        for (int step = 0; step < layout.grid_height(); step++) {
            int y = down ? layout.grid_height() - 1 - step : step;
            if (auto it = f.clbs.find({x, y}); it != f.clbs.end()) {
                ClbSite &site = it->second;
                for (int b = 0; b < N; b++)
                    emit_bits(Resource::Lut, x, y, 1 << K, &f.luts[site.lut_idx[b]].cfg_base);
                for (int b = 0; b < N; b++)
                    emit_mux_bits(site.bypass_mux[b]);
                for (int m : site.xbar_mux)
                    emit_mux_bits(m);
                for (int p : site.ipin_nodes)
                    emit_mux_bits(f.nodes[p].mux);
            } else if (auto io = f.ios.find({x, y}); io != f.ios.end()) {
                for (int p : io->second.pad_out_nodes)
                    emit_mux_bits(f.nodes[p].mux);
            }
            if (auto ow = owned_wires.find({x, y}); ow != owned_wires.end())
                for (int wn : ow->second)
                    emit_mux_bits(f.nodes[wn].mux);
        }
    }

    f.chain_order.resize(f.config_bits.size());
    f.chain_next.assign(f.config_bits.size(), -1);
    for (const auto &cb : f.config_bits) {
        f.chain_order[cb.chain_pos] = cb.id;
        if (cb.chain_pos + 1 < int(f.config_bits.size()))
            f.chain_next[cb.id] = -2; // patched below
    }
    for (size_t p = 0; p + 1 < f.chain_order.size(); p++)
        f.chain_next[f.chain_order[p]] = f.chain_order[p + 1];
    if (!f.chain_order.empty())
        f.chain_next[f.chain_order.back()] = -1;

    // signal driver index
    f.driver.assign(f.n_signals, Driver{});
    for (size_t m = 0; m < f.muxes.size(); m++)
        f.driver[f.muxes[m].out_sig] = {DriverKind::Mux, int(m)};
    for (size_t l = 0; l < f.luts.size(); l++)
        f.driver[f.luts[l].out_sig] = {DriverKind::Lut, int(l)};
    for (size_t d = 0; d < f.dffs.size(); d++)
        f.driver[f.dffs[d].q_sig] = {DriverKind::DffQ, int(d)};
    for (const auto &[coord, site] : f.ios)
        for (int n : site.pad_in_nodes)
            f.driver[f.nodes[n].sig] = {DriverKind::PadIn, n};
    return f;
}

// Depth-first walk of the chain successor edges from scan_head; verifies every
// bit is visited exactly once and that the order matches chain_pos.
inline std::vector<ConfigBit> order_scan_chain(const FabricModel &f)
{
    std::vector<ConfigBit> out;
    if (f.config_bits.empty())
        return out;
    std::vector<char> seen(f.config_bits.size(), 0);
    int cur = f.scan_head();
    int pos = 0;
    while (cur != -1) {
        if (seen[cur])
            throw Error("BrokenChain", "bit revisited at position " + std::to_string(pos));
        seen[cur] = 1;
        if (f.config_bits[cur].chain_pos != pos)
            throw Error("BrokenChain", "chain_pos mismatch at position " + std::to_string(pos));
        out.push_back(f.config_bits[cur]);
        cur = f.chain_next[cur];
        pos++;
    }
    if (pos != int(f.config_bits.size()))
        throw Error("BrokenChain", "walk terminated early at position " + std::to_string(pos));
    if (f.config_bits[out.back().id].id != f.scan_tail())
        throw Error("BrokenChain", "walk did not end at scan tail");
    return out;
}

} // namespace nufab

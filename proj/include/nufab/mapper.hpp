#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "nufab/fabric.hpp"
#include "nufab/netlist.hpp"
#include "nufab/placement.hpp"

namespace nufab {

// One BLE worth of logic: a LUT node and/or a registered latch. node < 0
// means a pass-through LUT feeding the latch FF.
struct BleUse {
    int node = -1;  // index into Netlist::nodes
    int latch = -1; // index into Netlist::latches
    int x = -1, y = -1, ble = -1;
};

struct Cluster {
    std::vector<int> members; // indices into Mapping::bles
};

struct RouterOptions {
    double p_fac = 0.5;
    double p_fac_growth = 1.5;
    double h_fac = 1.0;
    int max_iters = 50;
};

struct Mapping {
    std::vector<BleUse> bles;
    std::vector<Cluster> clusters;
    std::vector<std::pair<int, int>> cluster_tile; // cluster -> (x,y)
    std::map<std::string, std::pair<std::pair<int, int>, int>> input_pads;  // PI net -> ((x,y), subtile)
    std::map<std::string, std::pair<std::pair<int, int>, int>> output_pads; // PO net -> ((x,y), subtile)
    std::map<std::string, std::map<std::pair<int, int>, int>> net_ipin;     // net -> sink tile -> ipin index
    std::map<std::string, std::vector<std::pair<int, int>>> routes;         // net -> (prev node, node) edges
    std::vector<double> hpwl_trace; // objective after each accepted placement move
};

namespace detail {

// output net of a BLE
inline std::string ble_out_net(const Netlist &nl, const BleUse &b)
{
    if (b.latch >= 0)
        return nl.latches[b.latch].out;
    return nl.nodes[b.node].output;
}

inline std::vector<std::string> ble_in_nets(const Netlist &nl, const BleUse &b)
{
    if (b.node >= 0)
        return nl.nodes[b.node].fanin;
    return {nl.latches[b.latch].data};
}

} // namespace detail

// Fuse latches onto their driving node's BLE where the driven net has no
// other consumer; otherwise give the latch a pass-through BLE.
inline std::vector<BleUse> build_ble_list(const Netlist &nl)
{
    std::map<std::string, int> consumers;
    for (const auto &n : nl.nodes)
        for (const auto &fi : n.fanin)
            consumers[fi]++;
    for (const auto &o : nl.outputs)
        consumers[o]++;
    for (const auto &l : nl.latches)
        consumers[l.data]++;

    std::map<std::string, int> node_of_net;
    for (size_t i = 0; i < nl.nodes.size(); i++)
        node_of_net[nl.nodes[i].output] = int(i);

    std::vector<BleUse> bles;
    std::set<int> fused_nodes;
    for (size_t li = 0; li < nl.latches.size(); li++) {
        const Latch &l = nl.latches[li];
        auto it = node_of_net.find(l.data);
        if (it != node_of_net.end() && consumers[l.data] == 1 && !fused_nodes.count(it->second)) {
            BleUse b;
            b.node = it->second;
            b.latch = int(li);
            bles.push_back(b);
            fused_nodes.insert(it->second);
        } else {
            BleUse b;
            b.latch = int(li);
            bles.push_back(b);
        }
    }
    for (size_t ni = 0; ni < nl.nodes.size(); ni++)
        if (!fused_nodes.count(int(ni))) {
            BleUse b;
            b.node = int(ni);
            bles.push_back(b);
        }
    return bles;
}

// Greedy connectivity-driven clustering: seed with the highest-fanout
// unclustered BLE, absorb the neighbor sharing the most nets, subject to the
// N_ble slot limit and the tile input pin limit.
inline std::vector<Cluster> pack(const Netlist &nl, const ArchTemplate &t, std::vector<BleUse> &bles)
{
    for (const auto &n : nl.nodes)
        if (int(n.fanin.size()) > t.k)
            throw Error("Unpackable", "node " + n.output + " fan-in exceeds K");

    std::map<std::string, int> fanout;
    for (const auto &n : nl.nodes)
        for (const auto &fi : n.fanin)
            fanout[fi]++;
    for (const auto &o : nl.outputs)
        fanout[o]++;

    auto external_inputs = [&](const std::vector<int> &members, int extra) {
        std::set<std::string> outs, ins;
        auto add = [&](int bi) {
            outs.insert(detail::ble_out_net(nl, bles[bi]));
            for (const auto &in : detail::ble_in_nets(nl, bles[bi]))
                ins.insert(in);
        };
        for (int m : members)
            add(m);
        if (extra >= 0)
            add(extra);
        int count = 0;
        for (const auto &in : ins)
            if (!outs.count(in))
                count++;
        return count;
    };

    std::vector<Cluster> clusters;
    std::vector<char> used(bles.size(), 0);
    size_t remaining = bles.size();
    while (remaining > 0) {
        // seed: highest fanout of its output net, tie-break lowest index
        int seed = -1, seed_fo = -1;
        for (size_t i = 0; i < bles.size(); i++) {
            if (used[i])
                continue;
            int fo = fanout[detail::ble_out_net(nl, bles[i])];
            if (fo > seed_fo) {
                seed_fo = fo;
                seed = int(i);
            }
        }
        Cluster c;
        c.members.push_back(seed);
        used[seed] = 1;
        remaining--;
        while (int(c.members.size()) < t.n_ble && remaining > 0) {
            // absorb the unclustered BLE sharing the most nets with the cluster
            std::set<std::string> cluster_nets;
            for (int m : c.members) {
                cluster_nets.insert(detail::ble_out_net(nl, bles[m]));
                for (const auto &in : detail::ble_in_nets(nl, bles[m]))
                    cluster_nets.insert(in);
            }
            int best = -1, best_shared = -1;
            for (size_t i = 0; i < bles.size(); i++) {
                if (used[i])
                    continue;
                int shared = 0;
                if (cluster_nets.count(detail::ble_out_net(nl, bles[i])))
                    shared++;
                for (const auto &in : detail::ble_in_nets(nl, bles[i]))
                    if (cluster_nets.count(in))
                        shared++;
                if (shared > best_shared) {
                    best_shared = shared;
                    best = int(i);
                }
            }
            if (best < 0 || external_inputs(c.members, best) > t.clb_inputs)
                break;
            c.members.push_back(best);
            used[best] = 1;
            remaining--;
        }
        clusters.push_back(std::move(c));
    }
    return clusters;
}

namespace detail {

struct NetPins {
    std::pair<int, int> driver_tile{-1, -1};
    std::vector<std::pair<int, int>> sink_tiles;
};

inline double hpwl(const std::map<std::string, NetPins> &nets)
{
    double total = 0;
    for (const auto &[name, np] : nets) {
        int xmin = np.driver_tile.first, xmax = xmin, ymin = np.driver_tile.second, ymax = ymin;
        for (const auto &[x, y] : np.sink_tiles) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
        total += (xmax - xmin) + (ymax - ymin);
    }
    return total;
}

} // namespace detail

// Deterministic greedy placement plus pairwise-swap descent on HPWL.
// Assigns clusters to CLB tiles and primary I/O to IO pads.
inline void place_clusters(const Netlist &nl, const FabricLayout &layout, Mapping &m)
{
    auto clb_tiles = layout.tiles_of(TileKind::Clb);
    if (m.clusters.size() > clb_tiles.size())
        throw Error("InsufficientTiles", std::to_string(m.clusters.size()) + " clusters for " +
                                             std::to_string(clb_tiles.size()) + " CLB tiles");
    m.cluster_tile.resize(m.clusters.size());
    for (size_t c = 0; c < m.clusters.size(); c++)
        m.cluster_tile[c] = clb_tiles[c];

    // IO pads in ring order
    std::vector<std::pair<std::pair<int, int>, int>> pads;
    for (const auto &tile : layout.tiles_of(TileKind::Io))
        for (int s = 0; s < layout.io_capacity; s++)
            pads.push_back({tile, s});
    size_t next_pad = 0;
    if (nl.inputs.size() + nl.outputs.size() > pads.size())
        throw Error("InsufficientTiles", "not enough IO pads for primary I/O");
    for (const auto &pi : nl.inputs)
        m.input_pads[pi] = pads[next_pad++];
    for (const auto &po : nl.outputs)
        m.output_pads[po] = pads[next_pad++];

    // net pin model for HPWL
    auto cluster_of_ble = [&](int bi) {
        for (size_t c = 0; c < m.clusters.size(); c++)
            for (int mb : m.clusters[c].members)
                if (mb == bi)
                    return int(c);
        return -1;
    };
    std::map<std::string, int> driver_cluster; // net -> cluster
    for (size_t bi = 0; bi < m.bles.size(); bi++)
        driver_cluster[detail::ble_out_net(nl, m.bles[bi])] = cluster_of_ble(int(bi));

    auto build_nets = [&]() {
        std::map<std::string, detail::NetPins> nets;
        auto tile_of_net_driver = [&](const std::string &net) -> std::pair<int, int> {
            auto it = driver_cluster.find(net);
            if (it != driver_cluster.end())
                return m.cluster_tile[it->second];
            auto ip = m.input_pads.find(net);
            if (ip != m.input_pads.end())
                return ip->second.first;
            return {-1, -1};
        };
        auto touch = [&](const std::string &net, std::pair<int, int> sink) {
            auto &np = nets[net];
            if (np.driver_tile.first < 0)
                np.driver_tile = tile_of_net_driver(net);
            np.sink_tiles.push_back(sink);
        };
        for (size_t bi = 0; bi < m.bles.size(); bi++) {
            int c = cluster_of_ble(int(bi));
            for (const auto &in : detail::ble_in_nets(nl, m.bles[bi]))
                touch(in, m.cluster_tile[c]);
        }
        for (const auto &po : nl.outputs)
            touch(po, m.output_pads[po].first);
        return nets;
    };

    m.hpwl_trace.push_back(detail::hpwl(build_nets()));
    // pairwise swap descent over cluster/tile assignments (including spare tiles)
    bool improved = true;
    while (improved) {
        improved = false;
        for (size_t c = 0; c < m.clusters.size() && !improved; c++)
            for (const auto &tile : clb_tiles) {
                if (tile == m.cluster_tile[c])
                    continue;
                // occupant of `tile`, if any
                int other = -1;
                for (size_t c2 = 0; c2 < m.clusters.size(); c2++)
                    if (m.cluster_tile[c2] == tile)
                        other = int(c2);
                auto saved = m.cluster_tile;
                m.cluster_tile[c] = tile;
                if (other >= 0)
                    m.cluster_tile[other] = saved[c];
                double cost = detail::hpwl(build_nets());
                if (cost + 1e-9 < m.hpwl_trace.back()) {
                    m.hpwl_trace.push_back(cost);
                    improved = true;
                    break;
                }
                m.cluster_tile = saved;
            }
    }

    // commit tile coordinates onto BLEs
    for (size_t c = 0; c < m.clusters.size(); c++)
        for (size_t slot = 0; slot < m.clusters[c].members.size(); slot++) {
            BleUse &b = m.bles[m.clusters[c].members[slot]];
            b.x = m.cluster_tile[c].first;
            b.y = m.cluster_tile[c].second;
            b.ble = int(slot);
        }
}

namespace detail {

struct RouteNet {
    std::string name;
    int source_node = -1;
    // sinks: either a specific node (pad out) or any IPIN of a tile
    std::vector<int> pad_sinks;
    std::vector<std::pair<int, int>> tile_sinks;
};

} // namespace detail

// PathFinder-style negotiated congestion routing over the fabric's routing
// graph. On success every net has a clean route tree; persistent congestion
// raises Unroutable.
inline void route(Mapping &m, const Netlist &nl, const FabricModel &f, const RouterOptions &opt = {})
{
    // successor adjacency from mux inputs
    std::vector<std::vector<int>> fan_out(f.nodes.size());
    for (size_t n = 0; n < f.nodes.size(); n++) {
        if (f.nodes[n].mux < 0)
            continue;
        const MuxElem &mux = f.muxes[f.nodes[n].mux];
        for (int p : mux.in_nodes)
            if (p >= 0)
                fan_out[p].push_back(int(n));
    }

    std::map<std::string, int> driver_ble; // net -> ble index
    for (size_t bi = 0; bi < m.bles.size(); bi++)
        driver_ble[detail::ble_out_net(nl, m.bles[bi])] = int(bi);

    auto opin_node = [&](const std::string &net) -> int {
        auto db = driver_ble.find(net);
        if (db != driver_ble.end()) {
            const BleUse &b = m.bles[db->second];
            return f.clbs.at({b.x, b.y}).opin_nodes[b.ble];
        }
        auto ip = m.input_pads.find(net);
        if (ip != m.input_pads.end())
            return f.ios.at(ip->second.first).pad_in_nodes[ip->second.second];
        throw Error("InconsistentMapping", "no driver for net " + net);
    };

    // build net list: sinks are tiles needing the net plus output pads
    std::map<std::string, detail::RouteNet> nets;
    auto want = [&](const std::string &net) -> detail::RouteNet & {
        auto &rn = nets[net];
        if (rn.name.empty()) {
            rn.name = net;
            rn.source_node = opin_node(net);
        }
        return rn;
    };
    for (const auto &b : m.bles) {
        std::pair<int, int> tile{b.x, b.y};
        for (const auto &in : detail::ble_in_nets(nl, b)) {
            // feedback within the same tile bypasses general routing
            auto db = driver_ble.find(in);
            if (db != driver_ble.end() && std::pair{m.bles[db->second].x, m.bles[db->second].y} == tile)
                continue;
            auto &rn = want(in);
            if (std::find(rn.tile_sinks.begin(), rn.tile_sinks.end(), tile) == rn.tile_sinks.end())
                rn.tile_sinks.push_back(tile);
        }
    }
    for (const auto &po : nl.outputs) {
        auto &rn = want(po);
        rn.pad_sinks.push_back(f.ios.at(m.output_pads[po].first).pad_out_nodes[m.output_pads[po].second]);
    }

    std::vector<double> history(f.nodes.size(), 0.0);
    std::vector<int> occupancy(f.nodes.size(), 0);
    std::map<std::string, std::set<int>> net_nodes; // nodes in each net's tree
    double p_fac = opt.p_fac;

    auto node_cost = [&](int n, const std::string &net) {
        int occ = occupancy[n] - (net_nodes[net].count(n) ? 1 : 0);
        double present = 1.0 + p_fac * occ;
        return (1.0 + opt.h_fac * history[n]) * present;
    };

    auto route_net = [&](detail::RouteNet &rn) {
        auto &tree = net_nodes[rn.name];
        for (int n : tree)
            occupancy[n]--;
        tree.clear();
        m.routes[rn.name].clear();
        m.net_ipin[rn.name].clear();
        tree.insert(rn.source_node);

        auto grow_to = [&](auto accept) {
            // Dijkstra from the current tree
            std::vector<double> dist(f.nodes.size(), std::numeric_limits<double>::infinity());
            std::vector<int> prev(f.nodes.size(), -1);
            using QE = std::pair<double, int>;
            std::priority_queue<QE, std::vector<QE>, std::greater<>> q;
            for (int n : tree) {
                dist[n] = 0;
                q.push({0, n});
            }
            int found = -1;
            while (!q.empty()) {
                auto [d, n] = q.top();
                q.pop();
                if (d > dist[n])
                    continue;
                if (accept(n) && !tree.count(n)) {
                    found = n;
                    break;
                }
                // pins terminate paths; only wires may be passed through
                if (!tree.count(n) && f.nodes[n].kind != NodeKind::Wire && dist[n] > 0)
                    continue;
                for (int nxt : fan_out[n]) {
                    double nd = d + node_cost(nxt, rn.name);
                    if (nd < dist[nxt]) {
                        dist[nxt] = nd;
                        prev[nxt] = n;
                        q.push({nd, nxt});
                    }
                }
            }
            if (found < 0)
                throw Error("Unroutable", "no path for net " + rn.name);
            // trace back into the tree
            std::vector<std::pair<int, int>> edges;
            int cur = found;
            while (!tree.count(cur)) {
                edges.push_back({prev[cur], cur});
                cur = prev[cur];
            }
            for (auto it = edges.rbegin(); it != edges.rend(); ++it) {
                m.routes[rn.name].push_back(*it);
                if (!tree.count(it->second)) {
                    tree.insert(it->second);
                    occupancy[it->second]++;
                }
            }
            return found;
        };

        for (const auto &tile : rn.tile_sinks) {
            int ipin = grow_to([&](int n) {
                return f.nodes[n].kind == NodeKind::ClbIpin && f.nodes[n].x == tile.first &&
                       f.nodes[n].y == tile.second;
            });
            m.net_ipin[rn.name][tile] = f.nodes[ipin].idx;
        }
        for (int pad : rn.pad_sinks)
            grow_to([&](int n) { return n == pad; });
        if (!tree.empty()) {
            occupancy[rn.source_node]++; // source also occupies its node
        }
    };

    for (int iter = 0; iter < opt.max_iters; iter++) {
        for (auto &[name, rn] : nets)
            route_net(rn);
        // congestion check
        bool congested = false;
        for (size_t n = 0; n < f.nodes.size(); n++)
            if (occupancy[n] > 1) {
                congested = true;
                history[n] += occupancy[n] - 1;
            }
        if (!congested)
            return;
        p_fac *= opt.p_fac_growth;
    }
    throw Error("Unroutable", "congestion persists after " + std::to_string(opt.max_iters) + " iterations");
}

// Full pack -> place -> route pipeline.
inline Mapping map_design(const Netlist &nl, const FabricModel &f, const RouterOptions &opt = {})
{
    Mapping m;
    m.bles = build_ble_list(nl);
    m.clusters = pack(nl, f.tmpl, m.bles);
    place_clusters(nl, f.layout, m);
    route(m, nl, f, opt);
    return m;
}

// Emit the mapped design in `.place` format (same format placement_io parses):
// one entry per used BLE with the BLE index as subtile, one entry per bound
// IO pad.
inline Placement to_placement(const Netlist &nl, const Mapping &m, const FabricLayout &layout)
{
    Placement p;
    p.grid_width = layout.grid_width();
    p.grid_height = layout.grid_height();
    for (const auto &b : m.bles)
        p.entries.push_back({detail::ble_out_net(nl, b), b.x, b.y, b.ble});
    for (const auto &[net, pad] : m.input_pads)
        p.entries.push_back({net, pad.first.first, pad.first.second, pad.second});
    for (const auto &[net, pad] : m.output_pads)
        p.entries.push_back({net, pad.first.first, pad.first.second, pad.second});
    return p;
}

} // namespace nufab

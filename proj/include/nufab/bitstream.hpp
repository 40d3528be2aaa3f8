#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nufab/fabric.hpp"
#include "nufab/mapper.hpp"
#include "nufab/netlist.hpp"
#include "nufab/rng.hpp"

namespace nufab {

// Configuration bit vector in scan-chain order.
struct Bitstream {
    std::vector<uint8_t> bits;

    bool operator==(const Bitstream &) const = default;
    size_t size() const { return bits.size(); }
};

// Structural fingerprint guarding bitstream/fabric pairing (FNV-1a over the
// layout and template parameters).
inline uint64_t fabric_hash(const FabricModel &f)
{
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&](uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ull;
    };
    mix(uint64_t(f.layout.width) << 32 | uint32_t(f.layout.height));
    for (auto tk : f.layout.tiles)
        mix(uint64_t(tk) + 17);
    mix(uint64_t(f.tmpl.io_capacity));
    mix(uint64_t(f.tmpl.n_ble) << 32 | uint32_t(f.tmpl.k));
    mix(uint64_t(f.tmpl.w_ch));
    mix(f.tmpl.seed);
    mix(uint64_t(f.config_bits.size()));
    return h;
}

// Convert scan-order bits to structural-id order.
inline std::vector<uint8_t> to_structural(const FabricModel &f, const Bitstream &b)
{
    if (b.size() != f.config_bits.size())
        throw Error("InconsistentMapping", "bitstream length " + std::to_string(b.size()) + " != config bits " +
                                               std::to_string(f.config_bits.size()));
    std::vector<uint8_t> cfg(f.config_bits.size());
    for (const auto &cb : f.config_bits)
        cfg[cb.id] = b.bits[cb.chain_pos];
    return cfg;
}

inline Bitstream from_structural(const FabricModel &f, const std::vector<uint8_t> &cfg)
{
    Bitstream b;
    b.bits.assign(f.config_bits.size(), 0);
    for (const auto &cb : f.config_bits)
        b.bits[cb.chain_pos] = cfg[cb.id];
    return b;
}

// Assemble the bitstream realizing a mapping: LUT bits from node truth tables,
// mux selects from crossbar choices and route trees, all else zero.
inline Bitstream generate_bitstream(const Mapping &m, const Netlist &nl, const FabricModel &f,
                                    bool randomize_unused = false, uint64_t unused_seed = 0)
{
    std::vector<uint8_t> cfg(f.config_bits.size(), 0);
    std::vector<uint8_t> touched(f.config_bits.size(), 0);
    auto set_mux = [&](const MuxElem &mux, int sel) {
        if (sel < 0 || sel >= int(mux.in_sigs.size()))
            throw Error("InconsistentMapping", "mux select out of range");
        for (int b = 0; b < mux.cfg_width; b++) {
            cfg[mux.cfg_base + b] = (sel >> b) & 1;
            touched[mux.cfg_base + b] = 1;
        }
    };

    std::map<std::string, int> driver_ble;
    for (size_t bi = 0; bi < m.bles.size(); bi++)
        driver_ble[detail::ble_out_net(nl, m.bles[bi])] = int(bi);

    for (const auto &b : m.bles) {
        const ClbSite &site = f.clbs.at({b.x, b.y});
        const std::vector<int> &perm = f.pins.perm.at({b.x, b.y});
        const LutElem &lut = f.luts[site.lut_idx[b.ble]];
        const int K = f.tmpl.k, I = f.tmpl.clb_inputs;

        std::vector<std::string> ins = detail::ble_in_nets(nl, b);
        // crossbar selection per logical LUT input
        for (size_t k = 0; k < ins.size(); k++) {
            const std::string &net = ins[k];
            int sel;
            auto db = driver_ble.find(net);
            if (db != driver_ble.end() && m.bles[db->second].x == b.x && m.bles[db->second].y == b.y) {
                sel = I + m.bles[db->second].ble; // intra-tile feedback
            } else {
                sel = m.net_ipin.at(net).at({b.x, b.y});
            }
            int mux_idx = site.xbar_mux[perm.at(size_t(b.ble) * K + k)];
            set_mux(f.muxes[mux_idx], sel);
        }
        // LUT truth bits: expand the node table over K inputs, extra inputs
        // are don't-care
        for (int i = 0; i < (1 << K); i++) {
            uint8_t v = 0;
            if (b.node >= 0) {
                const LogicNode &node = nl.nodes[b.node];
                v = node.truth[i & ((1 << node.fanin.size()) - 1)];
            } else {
                v = (i & 1) ? 1 : 0; // pass-through for a bare latch
            }
            cfg[lut.cfg_base + i] = v;
            touched[lut.cfg_base + i] = 1;
        }
        // bypass: registered when a latch is attached
        set_mux(f.muxes[site.bypass_mux[b.ble]], b.latch >= 0 ? 1 : 0);
    }

    // routing mux selects from route trees
    for (const auto &[net, edges] : m.routes)
        for (const auto &[prev, node] : edges) {
            const RNode &rn = f.nodes[node];
            if (rn.mux < 0)
                throw Error("InconsistentMapping", "route through mux-less node");
            const MuxElem &mux = f.muxes[rn.mux];
            auto it = std::find(mux.in_nodes.begin(), mux.in_nodes.end(), prev);
            if (it == mux.in_nodes.end())
                throw Error("InconsistentMapping", "route edge not in mux inputs for net " + net);
            set_mux(mux, int(it - mux.in_nodes.begin()));
        }

    if (randomize_unused) {
        Rng rng(unused_seed, 0x756e75736564ull);
        for (size_t i = 0; i < cfg.size(); i++)
            if (!touched[i])
                cfg[i] = rng.coin();
    }
    return from_structural(f, cfg);
}

// Evaluate the configured fabric on the cone of the requested signals.
// `inputs` binds pad-input signals, `state` binds DFF outputs. Loops are only
// an error when they lie in the evaluated cone.
class FabricSim {
  public:
    FabricSim(const FabricModel &f, const Bitstream &b) : f_(f), cfg_(to_structural(f, b)) {}

    bool eval(int sig, const std::map<int, bool> &inputs, const std::map<int, bool> &state) const
    {
        std::map<int, int> mark;
        return eval_rec(sig, inputs, state, mark);
    }

  private:
    bool eval_rec(int sig, const std::map<int, bool> &inputs, const std::map<int, bool> &state,
                  std::map<int, int> &mark) const
    {
        if (auto it = inputs.find(sig); it != inputs.end())
            return it->second;
        auto mk = mark.find(sig);
        if (mk != mark.end()) {
            if (mk->second == 1)
                throw Error("CombinationalLoop", "signal " + std::to_string(sig));
            return cache_.at(sig);
        }
        const Driver &d = f_.driver.at(sig);
        bool v = false;
        switch (d.kind) {
        case DriverKind::None:
            v = false; // undriven resources read as 0
            break;
        case DriverKind::PadIn: {
            auto it = inputs.find(sig);
            v = it != inputs.end() && it->second;
            break;
        }
        case DriverKind::DffQ: {
            auto it = state.find(sig);
            v = it != state.end() && it->second;
            break;
        }
        case DriverKind::Mux: {
            mark[sig] = 1;
            const MuxElem &mux = f_.muxes[d.idx];
            int sel = 0;
            for (int b = 0; b < mux.cfg_width; b++)
                sel |= int(cfg_[mux.cfg_base + b]) << b;
            if (mux.in_sigs.empty() || sel >= int(mux.in_sigs.size()))
                v = false;
            else
                v = eval_rec(mux.in_sigs[sel], inputs, state, mark);
            break;
        }
        case DriverKind::Lut: {
            mark[sig] = 1;
            const LutElem &lut = f_.luts[d.idx];
            int idx = 0;
            for (size_t k = 0; k < lut.in_sigs.size(); k++)
                if (eval_rec(lut.in_sigs[k], inputs, state, mark))
                    idx |= 1 << k;
            v = cfg_[lut.cfg_base + idx] != 0;
            break;
        }
        }
        mark[sig] = 2;
        cache_[sig] = v;
        return v;
    }

    const FabricModel &f_;
    std::vector<uint8_t> cfg_;
    mutable std::map<int, bool> cache_;
};

// Single-step simulation of the configured fabric through the mapping's IO
// binding: `assignment` covers primary inputs and latch outputs by net name;
// returns primary outputs and latch data values.
inline std::map<std::string, bool> simulate_fabric(const FabricModel &f, const Bitstream &b, const Netlist &nl,
                                                   const Mapping &m, const std::map<std::string, bool> &assignment)
{
    FabricSim sim(f, b);
    std::map<int, bool> inputs, state;
    for (const auto &[net, pad] : m.input_pads) {
        auto it = assignment.find(net);
        if (it == assignment.end())
            throw Error("MissingAssignment", "primary input " + net);
        inputs[f.nodes[f.ios.at(pad.first).pad_in_nodes[pad.second]].sig] = it->second;
    }
    std::map<std::string, const DffElem *> latch_dff;
    for (size_t li = 0; li < nl.latches.size(); li++) {
        // find the BLE hosting this latch
        for (const auto &ble : m.bles)
            if (ble.latch == int(li)) {
                const ClbSite &site = f.clbs.at({ble.x, ble.y});
                const DffElem &dff = f.dffs[site.dff_idx[ble.ble]];
                latch_dff[nl.latches[li].out] = &dff;
                auto it = assignment.find(nl.latches[li].out);
                if (it == assignment.end())
                    throw Error("MissingAssignment", "latch output " + nl.latches[li].out);
                state[dff.q_sig] = it->second;
            }
    }

    std::map<std::string, bool> result;
    for (const auto &[net, pad] : m.output_pads)
        result[net] = sim.eval(f.nodes[f.ios.at(pad.first).pad_out_nodes[pad.second]].sig, inputs, state);
    for (const auto &l : nl.latches) {
        const DffElem *dff = latch_dff.at(l.out);
        result[l.data] = sim.eval(dff->d_sig, inputs, state);
    }
    return result;
}

struct EquivalenceVerdict {
    bool pass = true;
    std::map<std::string, bool> counterexample;
    long patterns_checked = 0;
    bool exhaustive = true;
};

// Compare netlist and configured fabric: exhaustive when the input space
// (primary inputs x latch state) fits in 2^16 / 2^20 patterns, else 10,000
// seeded random vectors.
inline EquivalenceVerdict check_equivalence(const Netlist &nl, const FabricModel &f, const Bitstream &b,
                                            const Mapping &m, uint64_t seed = 12345)
{
    EquivalenceVerdict v;
    std::vector<std::string> vars = nl.inputs;
    size_t n_pi = vars.size();
    for (const auto &l : nl.latches)
        vars.push_back(l.out);

    bool exhaustive = n_pi <= 16 && vars.size() <= 20;
    v.exhaustive = exhaustive;
    long total = exhaustive ? (1L << vars.size()) : 10000;

    Rng rng(seed, 0x65717576ull);
    for (long p = 0; p < total; p++) {
        std::map<std::string, bool> assign;
        for (size_t i = 0; i < vars.size(); i++)
            assign[vars[i]] = exhaustive ? ((p >> i) & 1) != 0 : rng.coin();
        auto want = eval_netlist(nl, assign);
        auto got = simulate_fabric(f, b, nl, m, assign);
        v.patterns_checked++;
        for (const auto &[net, val] : want)
            if (got.at(net) != val) {
                v.pass = false;
                v.counterexample = assign;
                return v;
            }
    }
    return v;
}

// Bitstream file: `# bits=<n> fabric=<hash>` header then one ASCII 0/1 per line.
inline void write_bitstream(const Bitstream &b, uint64_t hash, std::ostream &os)
{
    os << "# bits=" << b.size() << " fabric=" << hash << "\n";
    for (auto bit : b.bits)
        os << int(bit) << "\n";
}

inline Bitstream read_bitstream(std::istream &is, uint64_t expect_hash)
{
    std::string header;
    if (!std::getline(is, header) || header.rfind("# bits=", 0) != 0)
        throw SyntaxError("missing bitstream header");
    std::istringstream hs(header.substr(7));
    size_t n = 0;
    std::string fab;
    hs >> n >> fab;
    if (fab.rfind("fabric=", 0) != 0)
        throw SyntaxError("missing fabric hash in header");
    uint64_t hash = std::stoull(fab.substr(7));
    if (expect_hash != 0 && hash != expect_hash)
        throw Error("InconsistentMapping", "bitstream belongs to a different fabric");
    Bitstream b;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (line != "0" && line != "1")
            throw SyntaxError("bad bitstream line");
        b.bits.push_back(line == "1");
    }
    if (b.size() != n)
        throw SyntaxError("bitstream length mismatch with header");
    return b;
}

} // namespace nufab

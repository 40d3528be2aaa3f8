#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nufab/bench.hpp"
#include "nufab/bitstream.hpp"
#include "nufab/fabric.hpp"
#include "nufab/mapper.hpp"
#include "nufab/rng.hpp"
#include "nufab/sat.hpp"

namespace nufab {

// Gate-level view of a configured-but-unprogrammed fabric: every configuration
// bit becomes a free input named key<chain_pos>, LUTs expand to AND-OR over
// their minterms and muxes to one-hot decoded AND-OR terms. The netlist is
// restricted to the cones of the bound output pads, with bound input pads as
// primary inputs, so it is exactly what an attacker holding the locked design
// and pin assignment would reconstruct.
struct KeyedNetlist {
    GateNetlist gn;
    std::vector<int> key_bits; // chain positions that appear as key inputs
};

inline KeyedNetlist export_keyed_bench(const FabricModel &f, const Mapping &m)
{
    KeyedNetlist out;
    out.gn.name = "keyed_fabric";

    std::map<int, std::string> sig_name;
    std::set<int> bound_in_sigs;
    for (const auto &[net, loc] : m.input_pads) {
        const IoSite &site = f.ios.at(loc.first);
        int sig = f.nodes[site.pad_in_nodes.at(loc.second)].sig;
        sig_name[sig] = net;
        bound_in_sigs.insert(sig);
    }
    for (const auto &[net, loc] : m.output_pads) {
        const IoSite &site = f.ios.at(loc.first);
        sig_name[f.nodes[site.pad_out_nodes.at(loc.second)].sig] = net;
    }

    auto name_of = [&](int sig) {
        auto it = sig_name.find(sig);
        return it != sig_name.end() ? it->second : "fs" + std::to_string(sig);
    };

    std::set<int> keys_used;
    std::set<std::string> inverted; // nets with an emitted NOT gate
    auto key_name = [&](int bit_id) {
        int pos = f.config_bits.at(bit_id).chain_pos;
        keys_used.insert(pos);
        return "key" + std::to_string(pos);
    };
    auto inv_of = [&](const std::string &n) {
        std::string nn = n + "_n";
        if (inverted.insert(n).second)
            out.gn.gates.push_back({GateKind::Not, nn, {n}});
        return nn;
    };

    std::set<int> emitted;
    std::function<void(int)> emit = [&](int sig) {
        if (!emitted.insert(sig).second)
            return;
        const std::string nm = name_of(sig);
        const Driver &d = f.driver.at(sig);
        switch (d.kind) {
        case DriverKind::None:
            out.gn.gates.push_back({GateKind::Const0, nm, {}});
            break;
        case DriverKind::PadIn:
            if (bound_in_sigs.count(sig))
                out.gn.inputs.push_back(nm);
            else
                out.gn.gates.push_back({GateKind::Const0, nm, {}});
            break;
        case DriverKind::DffQ: {
            const DffElem &dff = f.dffs[d.idx];
            emit(dff.d_sig);
            out.gn.gates.push_back({GateKind::Dff, nm, {name_of(dff.d_sig)}});
            break;
        }
        case DriverKind::Lut: {
            const LutElem &lut = f.luts[d.idx];
            for (int in : lut.in_sigs)
                emit(in);
            std::vector<std::string> terms;
            int n_min = 1 << int(lut.in_sigs.size());
            for (int i = 0; i < n_min; i++) {
                std::vector<std::string> conj{key_name(lut.cfg_base + i)};
                for (size_t k = 0; k < lut.in_sigs.size(); k++) {
                    std::string in = name_of(lut.in_sigs[k]);
                    conj.push_back((i >> k) & 1 ? in : inv_of(in));
                }
                std::string t = nm + "_m" + std::to_string(i);
                out.gn.gates.push_back({GateKind::And, t, std::move(conj)});
                terms.push_back(t);
            }
            out.gn.gates.push_back({GateKind::Or, nm, std::move(terms)});
            break;
        }
        case DriverKind::Mux: {
            const MuxElem &mx = f.muxes[d.idx];
            if (mx.in_sigs.empty()) {
                out.gn.gates.push_back({GateKind::Const0, nm, {}});
                break;
            }
            for (int in : mx.in_sigs)
                emit(in);
            if (mx.cfg_width == 0) {
                out.gn.gates.push_back({GateKind::Buff, nm, {name_of(mx.in_sigs[0])}});
                break;
            }
            std::vector<std::string> terms;
            for (size_t i = 0; i < mx.in_sigs.size(); i++) {
                std::vector<std::string> conj;
                for (int k = 0; k < mx.cfg_width; k++) {
                    std::string kb = key_name(mx.cfg_base + k);
                    conj.push_back((i >> k) & 1 ? kb : inv_of(kb));
                }
                conj.push_back(name_of(mx.in_sigs[i]));
                std::string t = nm + "_t" + std::to_string(i);
                out.gn.gates.push_back({GateKind::And, t, std::move(conj)});
                terms.push_back(t);
            }
            out.gn.gates.push_back({GateKind::Or, nm, std::move(terms)});
            break;
        }
        }
    };

    for (const auto &[net, loc] : m.output_pads) {
        const IoSite &site = f.ios.at(loc.first);
        int sig = f.nodes[site.pad_out_nodes.at(loc.second)].sig;
        emit(sig);
        out.gn.outputs.push_back(name_of(sig));
    }

    // every configuration bit is a key input, including bits whose logic the
    // bound-output cones never reach (their gates simply don't mention them)
    (void)keys_used;
    for (const auto &cb : f.config_bits)
        out.key_bits.push_back(cb.chain_pos);
    std::sort(out.key_bits.begin(), out.key_bits.end());
    for (int pos : out.key_bits)
        out.gn.inputs.push_back("key" + std::to_string(pos));
    return out;
}

// The correct key restricted to the exported key bits, read off a bitstream
// (bitstream bits are stored in chain order).
inline std::map<std::string, bool> correct_key(const KeyedNetlist &kn, const Bitstream &b)
{
    std::map<std::string, bool> key;
    for (int pos : kn.key_bits)
        key["key" + std::to_string(pos)] = b.bits.at(size_t(pos)) != 0;
    return key;
}

// ---------------------------------------------------------------------------
// Full-scan view: sequential elements as pseudo-PI/PO

// Removes DFF gates, promoting each DFF output to a pseudo primary input and
// each DFF data net to a pseudo primary output. This is the standard
// combinational SAT-attack model for scannable designs.
struct FullScanView {
    GateNetlist comb;
    std::vector<std::string> state_inputs;  // former DFF outputs
    std::vector<std::string> state_outputs; // former DFF data nets
};

inline FullScanView full_scan(const GateNetlist &g)
{
    FullScanView v;
    v.comb.name = g.name;
    v.comb.inputs = g.inputs;
    v.comb.outputs = g.outputs;
    for (const auto &gt : g.gates) {
        if (gt.kind == GateKind::Dff) {
            v.state_inputs.push_back(gt.out);
            v.state_outputs.push_back(gt.in.at(0));
            v.comb.inputs.push_back(gt.out);
            v.comb.outputs.push_back(gt.in.at(0));
        } else {
            v.comb.gates.push_back(gt);
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Cycle unrolling

struct UnrolledModel {
    GateNetlist gn; // acyclic; key and primary inputs shared across frames
    int frames = 0;
    size_t feedback_edges = 0;
};

// Replicates a cyclic combinational netlist: a DFS feedback edge set becomes
// frame-crossing edges, frame-1 feedback sinks are tied to 0, inputs are
// shared across frames, and outputs come from the last frame. An acyclic
// netlist is returned unchanged regardless of the requested frame count.
inline UnrolledModel break_cycles(const GateNetlist &g, int frames = 0)
{
    std::map<std::string, const Gate *> by_out;
    for (const auto &gt : g.gates)
        by_out[gt.out] = &gt;

    // feedback edge set: edges (src net, gate out) closing a DFS cycle.
    // DFF gates never contribute combinational edges.
    std::set<std::pair<std::string, std::string>> feedback;
    std::map<std::string, int> color; // 0 unseen, 1 on stack, 2 done
    for (const auto &gt : g.gates) {
        if (color[gt.out])
            continue;
        // iterative DFS
        std::vector<std::pair<std::string, size_t>> stack{{gt.out, 0}};
        color[gt.out] = 1;
        while (!stack.empty()) {
            auto &[cur, idx] = stack.back();
            const Gate *cg = by_out.count(cur) ? by_out.at(cur) : nullptr;
            if (!cg || cg->kind == GateKind::Dff || idx >= cg->in.size()) {
                color[cur] = 2;
                stack.pop_back();
                continue;
            }
            std::string nxt = cg->in[idx++];
            if (!by_out.count(nxt))
                continue; // primary/key input
            int c = color[nxt];
            if (c == 1)
                feedback.insert({nxt, cur});
            else if (c == 0) {
                color[nxt] = 1;
                stack.push_back({nxt, 0});
            }
        }
    }

    std::set<std::string> seq_outs;
    for (const auto &gt : g.gates)
        if (gt.kind == GateKind::Dff)
            seq_outs.insert(gt.out);

    UnrolledModel um;
    um.feedback_edges = feedback.size();
    if (feedback.empty() && seq_outs.empty()) {
        um.gn = g;
        um.frames = 1;
        return um;
    }
    int u = frames > 0 ? frames : std::min<int>(int(feedback.size()) + int(seq_outs.size()) + 1, 64);
    um.frames = u;
    um.gn.name = g.name + "_u" + std::to_string(u);
    um.gn.inputs = g.inputs;

    std::set<std::string> shared(g.inputs.begin(), g.inputs.end());
    auto frame_net = [&](const std::string &n, int t) {
        if (shared.count(n))
            return n;
        return n + "@" + std::to_string(t);
    };

    // zero gate, emitted on demand
    bool have_zero = false;
    auto zero = [&] {
        if (!have_zero) {
            um.gn.gates.push_back({GateKind::Const0, "unroll_zero", {}});
            have_zero = true;
        }
        return std::string("unroll_zero");
    };

    for (int t = 1; t <= u; t++)
        for (const auto &gt : g.gates) {
            Gate ng;
            ng.out = frame_net(gt.out, t);
            if (gt.kind == GateKind::Dff) {
                ng.kind = GateKind::Buff;
                ng.in.push_back(t == 1 ? zero() : frame_net(gt.in[0], t - 1));
            } else {
                ng.kind = gt.kind;
                for (const auto &in : gt.in) {
                    bool crossing = feedback.count({in, gt.out}) != 0;
                    if (crossing)
                        ng.in.push_back(t == 1 ? zero() : frame_net(in, t - 1));
                    else
                        ng.in.push_back(frame_net(in, t));
                }
            }
            um.gn.gates.push_back(std::move(ng));
        }
    for (const auto &po : g.outputs)
        um.gn.outputs.push_back(frame_net(po, u));
    return um;
}

// ---------------------------------------------------------------------------
// CNF encoding and miter

namespace detail {

// Tseitin encoder for an acyclic DFF-free gate netlist. Net variables are
// created per instance prefix so multiple circuit copies can coexist.
struct CnfCopy {
    std::map<std::string, int> var_of;
};

class CnfBuilder {
  public:
    explicit CnfBuilder(sat::Solver &s) : s_(s) {}

    int var(CnfCopy &c, const std::string &net)
    {
        auto it = c.var_of.find(net);
        if (it != c.var_of.end())
            return it->second;
        int v = s_.new_var();
        c.var_of[net] = v;
        return v;
    }

    // encode all gates; key nets already present in `c.var_of` are reused
    // (that is how key variables get shared between copies)
    void encode(CnfCopy &c, const GateNetlist &g)
    {
        for (const auto &gt : g.gates) {
            int y = var(c, gt.out);
            std::vector<int> xs;
            for (const auto &in : gt.in)
                xs.push_back(var(c, in));
            encode_gate(gt.kind, y, xs);
        }
    }

    void encode_gate(GateKind k, int y, const std::vector<int> &xs)
    {
        using sat::mk_lit;
        auto add = [&](std::vector<sat::Lit> cl) { s_.add_clause(std::move(cl)); };
        switch (k) {
        case GateKind::Const0: add({mk_lit(y, true)}); return;
        case GateKind::Const1: add({mk_lit(y)}); return;
        case GateKind::Buff:
        case GateKind::Dff:
            add({mk_lit(y, true), mk_lit(xs[0])});
            add({mk_lit(y), mk_lit(xs[0], true)});
            return;
        case GateKind::Not:
            add({mk_lit(y, true), mk_lit(xs[0], true)});
            add({mk_lit(y), mk_lit(xs[0])});
            return;
        case GateKind::And:
        case GateKind::Nand: {
            bool n = k == GateKind::Nand;
            std::vector<sat::Lit> big{mk_lit(y, n)};
            for (int x : xs) {
                add({mk_lit(y, !n), mk_lit(x)});
                big.push_back(mk_lit(x, true));
            }
            add(std::move(big));
            return;
        }
        case GateKind::Or:
        case GateKind::Nor: {
            bool n = k == GateKind::Nor;
            std::vector<sat::Lit> big{mk_lit(y, !n)};
            for (int x : xs) {
                add({mk_lit(y, n), mk_lit(x, true)});
                big.push_back(mk_lit(x));
            }
            add(std::move(big));
            return;
        }
        case GateKind::Xor:
        case GateKind::Xnor: {
            // fold pairwise through fresh vars, then y = acc (or !acc)
            int acc = xs[0];
            for (size_t i = 1; i < xs.size(); i++) {
                int nxt = s_.new_var();
                encode_xor2(nxt, acc, xs[i]);
                acc = nxt;
            }
            bool inv = k == GateKind::Xnor;
            add({mk_lit(y, true), mk_lit(acc, inv)});
            add({mk_lit(y), mk_lit(acc, !inv)});
            return;
        }
        }
    }

    void encode_xor2(int y, int a, int b)
    {
        using sat::mk_lit;
        s_.add_clause({mk_lit(y, true), mk_lit(a), mk_lit(b)});
        s_.add_clause({mk_lit(y, true), mk_lit(a, true), mk_lit(b, true)});
        s_.add_clause({mk_lit(y), mk_lit(a, true), mk_lit(b)});
        s_.add_clause({mk_lit(y), mk_lit(a), mk_lit(b, true)});
    }

  private:
    sat::Solver &s_;
};

} // namespace detail

// Two copies of the unrolled keyed circuit sharing primary inputs, with
// independent key variables and an activation literal guarding the
// output-difference constraint.
struct Miter {
    sat::Solver solver;
    detail::CnfCopy copy1, copy2;          // key vars live in each copy
    std::map<std::string, int> shared_pis; // PI name -> var
    int act = -1;                          // activation variable
    std::vector<std::string> key_names;
    std::vector<std::string> pi_names;
    std::vector<std::string> po_names;
};

inline void build_miter(Miter &mt, const GateNetlist &g, const std::vector<std::string> &key_names)
{
    std::set<std::string> keys(key_names.begin(), key_names.end());
    mt.key_names = key_names;
    for (const auto &in : g.inputs)
        if (!keys.count(in))
            mt.pi_names.push_back(in);
    mt.po_names = g.outputs;

    detail::CnfBuilder cb(mt.solver);
    // shared PI variables
    for (const auto &pi : mt.pi_names) {
        int v = cb.var(mt.copy1, pi);
        mt.copy2.var_of[pi] = v;
        mt.shared_pis[pi] = v;
    }
    // key variables up front: keys driving no emitted gate (bits of unused
    // fabric resources) still need a column in the recovered key
    for (const auto &k : key_names) {
        cb.var(mt.copy1, k);
        cb.var(mt.copy2, k);
    }
    cb.encode(mt.copy1, g);
    cb.encode(mt.copy2, g);

    mt.act = mt.solver.new_var();
    std::vector<sat::Lit> diff{sat::mk_lit(mt.act, true)};
    for (const auto &po : g.outputs) {
        int d = mt.solver.new_var();
        cb.encode_xor2(d, cb.var(mt.copy1, po), cb.var(mt.copy2, po));
        diff.push_back(sat::mk_lit(d));
    }
    mt.solver.add_clause(std::move(diff));
}

enum class AttackStatus { Success, Timeout, Unsat };

struct AttackResult {
    AttackStatus status = AttackStatus::Timeout;
    std::map<std::string, bool> key; // key name -> value (valid on Success)
    int dip_count = 0;
    int unroll_frames = 0;
    long n_clauses = 0;
    int n_variables = 0;
    double seconds = 0;
};

struct AttackBudget {
    double seconds = 3600;
    size_t max_clause_literals = 200u * 1000u * 1000u; // memory cap
    int max_dips = 0;                                  // 0 = unlimited
};

// Input/output-queryable black box: PI assignment in, PO values out.
using Oracle = std::function<std::map<std::string, bool>(const std::map<std::string, bool> &)>;

// Ground-truth oracle over the configured fabric, speaking the keyed
// netlist's net names (bound pad nets plus fs<sig> pseudo-state nets from the
// full-scan view). Owns copies of the model and bitstream so it can outlive
// its arguments.
inline Oracle make_fabric_oracle(const FabricModel &f, const Bitstream &b, const Mapping &m, const KeyedNetlist &kn)
{
    struct Ctx {
        FabricModel f;
        Bitstream b;
        Mapping m;
        FullScanView view;
        std::vector<std::pair<int, std::string>> in_pads;  // sig, net
        std::vector<std::pair<int, std::string>> out_pads; // sig, net
    };
    auto ctx = std::make_shared<Ctx>();
    ctx->f = f;
    ctx->b = b;
    ctx->m = m;
    ctx->view = full_scan(kn.gn);
    for (const auto &[net, loc] : m.input_pads)
        ctx->in_pads.push_back({f.nodes[f.ios.at(loc.first).pad_in_nodes.at(loc.second)].sig, net});
    for (const auto &[net, loc] : m.output_pads)
        ctx->out_pads.push_back({f.nodes[f.ios.at(loc.first).pad_out_nodes.at(loc.second)].sig, net});

    return [ctx](const std::map<std::string, bool> &assignment) {
        FabricSim sim(ctx->f, ctx->b);
        std::map<int, bool> inputs, state;
        for (const auto &[sig, net] : ctx->in_pads)
            if (auto it = assignment.find(net); it != assignment.end())
                inputs[sig] = it->second;
        for (const auto &st : ctx->view.state_inputs) {
            int sig = std::stoi(st.substr(2)); // "fs<q_sig>"
            if (auto it = assignment.find(st); it != assignment.end())
                state[sig] = it->second;
        }
        std::map<std::string, bool> out;
        for (const auto &[sig, net] : ctx->out_pads)
            out[net] = sim.eval(sig, inputs, state);
        for (const auto &st : ctx->view.state_outputs)
            out[st] = sim.eval(std::stoi(st.substr(2)), inputs, state);
        return out;
    };
}

// Oracle-guided attack: find distinguishing input patterns (DIPs) from the
// miter, constrain both key copies to agree with the oracle on each DIP, and
// stop when no further DIP exists; any remaining satisfying key is functionally
// equivalent to the correct one on the modeled circuit.
inline AttackResult sat_attack(const KeyedNetlist &kn, const Oracle &oracle, const AttackBudget &budget = {},
                               int frames = 0)
{
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    FullScanView fsv = full_scan(kn.gn);
    UnrolledModel um = break_cycles(fsv.comb, frames);
    std::vector<std::string> key_names;
    for (int pos : kn.key_bits)
        key_names.push_back("key" + std::to_string(pos));

    Miter mt;
    build_miter(mt, um.gn, key_names);

    AttackResult res;
    res.unroll_frames = um.frames;

    detail::CnfBuilder cb(mt.solver);
    auto remaining = [&] { return budget.seconds - elapsed(); };
    auto make_budget = [&] {
        sat::SolveBudget b;
        b.seconds = std::max(0.01, remaining());
        b.max_literals = budget.max_clause_literals;
        return b;
    };

    auto finish = [&](AttackStatus st) {
        res.status = st;
        res.n_clauses = mt.solver.num_clauses();
        res.n_variables = mt.solver.num_vars();
        res.seconds = elapsed();
        return res;
    };

    for (;;) {
        if (remaining() <= 0)
            return finish(AttackStatus::Timeout);
        sat::Result r = mt.solver.solve({sat::mk_lit(mt.act)}, make_budget());
        if (r == sat::Result::Budget)
            return finish(AttackStatus::Timeout);
        if (r == sat::Result::Unsat)
            break; // no distinguishing input remains
        // extract DIP and query the oracle
        std::map<std::string, bool> dip;
        for (const auto &[pi, v] : mt.shared_pis)
            dip[pi] = mt.solver.model_value(v);
        std::map<std::string, bool> want = oracle(dip);
        res.dip_count++;

        // add two constrained copies of the circuit at this input point
        for (detail::CnfCopy *keyed : {&mt.copy1, &mt.copy2}) {
            detail::CnfCopy cc;
            for (const auto &k : key_names)
                cc.var_of[k] = keyed->var_of.at(k);
            for (const auto &[pi, val] : dip) {
                int v = cb.var(cc, pi);
                mt.solver.add_clause({sat::mk_lit(v, !val)});
            }
            cb.encode(cc, um.gn);
            for (const auto &po : um.gn.outputs) {
                bool val = want.at(po.substr(0, po.find('@')));
                mt.solver.add_clause({sat::mk_lit(cc.var_of.at(po), !val)});
            }
        }
        if (mt.solver.clause_literals() > budget.max_clause_literals)
            return finish(AttackStatus::Timeout);
        if (budget.max_dips && res.dip_count >= budget.max_dips)
            return finish(AttackStatus::Timeout);
    }

    // final key extraction with the difference constraint disabled
    sat::Result r = mt.solver.solve({sat::mk_lit(mt.act, true)}, make_budget());
    if (r == sat::Result::Budget)
        return finish(AttackStatus::Timeout);
    if (r == sat::Result::Unsat)
        return finish(AttackStatus::Unsat);
    for (const auto &k : key_names)
        res.key[k] = mt.solver.model_value(mt.copy1.var_of.at(k));
    return finish(AttackStatus::Success);
}

// Functional check of a recovered key against a reference key on the unrolled
// model: both keys must produce identical outputs for every probed input.
inline bool keys_equivalent(const KeyedNetlist &kn, const std::map<std::string, bool> &key_a,
                            const std::map<std::string, bool> &key_b, int frames = 0, int n_vectors = 256,
                            uint64_t seed = 7)
{
    UnrolledModel um = break_cycles(full_scan(kn.gn).comb, frames);
    std::set<std::string> keys;
    for (int pos : kn.key_bits)
        keys.insert("key" + std::to_string(pos));
    std::vector<std::string> pis;
    for (const auto &in : um.gn.inputs)
        if (!keys.count(in))
            pis.push_back(in);

    bool exhaustive = pis.size() <= 12;
    long total = exhaustive ? (1L << pis.size()) : n_vectors;
    Rng rng(seed, 0xa77ac4);
    for (long i = 0; i < total; i++) {
        std::map<std::string, bool> a, b;
        for (size_t p = 0; p < pis.size(); p++) {
            bool v = exhaustive ? ((i >> p) & 1) != 0 : rng.coin();
            a[pis[p]] = v;
            b[pis[p]] = v;
        }
        for (const auto &[k, v] : key_a)
            a[k] = v;
        for (const auto &[k, v] : key_b)
            b[k] = v;
        if (eval_gate_netlist(um.gn, a) != eval_gate_netlist(um.gn, b))
            return false;
    }
    return true;
}

// Resilience summary used by the reporting layer: SAT-instance size relative
// to the configuration stream length.
struct SecurityStats {
    int key_bits = 0;
    int n_variables = 0;
    long n_clauses = 0;
    int bitstream_bits = 0;
    double vars_per_bit = 0;
    double clauses_per_bit = 0;
};

inline SecurityStats security_stats(const KeyedNetlist &kn, const FabricModel &f, int frames = 0)
{
    UnrolledModel um = break_cycles(full_scan(kn.gn).comb, frames);
    std::vector<std::string> key_names;
    for (int pos : kn.key_bits)
        key_names.push_back("key" + std::to_string(pos));
    Miter mt;
    build_miter(mt, um.gn, key_names);

    SecurityStats st;
    st.key_bits = int(kn.key_bits.size());
    st.n_variables = mt.solver.num_vars();
    st.n_clauses = mt.solver.num_clauses();
    st.bitstream_bits = count_config_bits(f);
    if (st.bitstream_bits > 0) {
        st.vars_per_bit = double(st.n_variables) / st.bitstream_bits;
        st.clauses_per_bit = double(st.n_clauses) / st.bitstream_bits;
    }
    return st;
}

} // namespace nufab

#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nufab/errors.hpp"
#include "nufab/netlist.hpp"

namespace nufab {

enum class GateKind { And, Or, Nand, Nor, Xor, Xnor, Not, Buff, Dff, Const0, Const1 };

inline const char *gate_name(GateKind k)
{
    switch (k) {
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Nand: return "NAND";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Not: return "NOT";
    case GateKind::Buff: return "BUFF";
    case GateKind::Dff: return "DFF";
    case GateKind::Const0: return "CONST0";
    case GateKind::Const1: return "CONST1";
    }
    return "?";
}

struct Gate {
    GateKind kind;
    std::string out;
    std::vector<std::string> in;

    bool operator==(const Gate &) const = default;
};

// Gate-level netlist in BENCH terms. CONST0()/CONST1() are a documented
// dialect extension for tie-offs.
struct GateNetlist {
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<Gate> gates;

    bool operator==(const GateNetlist &) const = default;
};

inline bool eval_gate(GateKind k, const std::vector<bool> &v)
{
    auto all = [&](bool want) {
        for (bool b : v)
            if (b != want)
                return false;
        return true;
    };
    auto parity = [&] {
        bool p = false;
        for (bool b : v)
            p ^= b;
        return p;
    };
    switch (k) {
    case GateKind::And: return all(true);
    case GateKind::Nand: return !all(true);
    case GateKind::Or: return !all(false);
    case GateKind::Nor: return all(false);
    case GateKind::Xor: return parity();
    case GateKind::Xnor: return !parity();
    case GateKind::Not: return !v.at(0);
    case GateKind::Buff:
    case GateKind::Dff: return v.at(0);
    case GateKind::Const0: return false;
    case GateKind::Const1: return true;
    }
    return false;
}

// Evaluate the combinational view: DFF outputs are treated as state inputs and
// must be covered by `assignment`; returns primary outputs plus DFF data nets.
inline std::map<std::string, bool> eval_gate_netlist(const GateNetlist &g, const std::map<std::string, bool> &assignment)
{
    std::map<std::string, const Gate *> by_out;
    for (const auto &gt : g.gates)
        by_out[gt.out] = &gt;

    std::map<std::string, bool> value;
    for (const auto &i : g.inputs) {
        auto it = assignment.find(i);
        if (it == assignment.end())
            throw Error("MissingAssignment", "input " + i);
        value[i] = it->second;
    }
    for (const auto &gt : g.gates)
        if (gt.kind == GateKind::Dff) {
            auto it = assignment.find(gt.out);
            if (it == assignment.end())
                throw Error("MissingAssignment", "state net " + gt.out);
            value[gt.out] = it->second;
        }

    std::map<std::string, int> state;
    auto eval_net = [&](const std::string &root) {
        if (value.count(root))
            return;
        std::vector<std::pair<std::string, size_t>> stack{{root, 0}};
        while (!stack.empty()) {
            auto &[net, next_child] = stack.back();
            if (value.count(net)) {
                stack.pop_back();
                continue;
            }
            auto it = by_out.find(net);
            if (it == by_out.end())
                throw Error("MissingAssignment", "undriven net " + net);
            const Gate *gt = it->second;
            if (next_child == 0)
                state[net] = 1;
            if (next_child < gt->in.size()) {
                const std::string &f = gt->in[next_child++];
                if (!value.count(f)) {
                    if (state[f] == 1)
                        throw Error("CombinationalLoop", "through net " + f);
                    stack.push_back({f, 0});
                }
            } else {
                std::vector<bool> v;
                v.reserve(gt->in.size());
                for (const auto &f : gt->in)
                    v.push_back(value.at(f));
                value[net] = eval_gate(gt->kind, v);
                state[net] = 2;
                stack.pop_back();
            }
        }
    };

    std::map<std::string, bool> result;
    for (const auto &o : g.outputs) {
        eval_net(o);
        result[o] = value.at(o);
    }
    for (const auto &gt : g.gates)
        if (gt.kind == GateKind::Dff) {
            eval_net(gt.in.at(0));
            result[gt.in.at(0)] = value.at(gt.in.at(0));
        }
    return result;
}

// Expand a LUT netlist into BENCH primitives: each node becomes an AND-OR of
// its on-set minterms; latches become DFFs.
inline GateNetlist to_gate_netlist(const Netlist &nl)
{
    GateNetlist g;
    g.name = nl.name;
    g.inputs = nl.inputs;
    g.outputs = nl.outputs;

    std::map<std::string, std::string> inverted; // net -> inverter output
    auto inv = [&](const std::string &net) {
        auto it = inverted.find(net);
        if (it != inverted.end())
            return it->second;
        std::string out = net + "_inv";
        g.gates.push_back({GateKind::Not, out, {net}});
        inverted[net] = out;
        return out;
    };

    for (const auto &node : nl.nodes) {
        size_t ones = 0;
        for (auto b : node.truth)
            ones += b;
        if (ones == 0) {
            g.gates.push_back({GateKind::Const0, node.output, {}});
            continue;
        }
        if (ones == node.truth.size()) {
            g.gates.push_back({GateKind::Const1, node.output, {}});
            continue;
        }
        if (node.fanin.size() == 1) {
            g.gates.push_back({node.truth[1] ? GateKind::Buff : GateKind::Not, node.output, {node.fanin[0]}});
            continue;
        }
        std::vector<std::string> minterms;
        for (size_t i = 0; i < node.truth.size(); i++) {
            if (!node.truth[i])
                continue;
            std::vector<std::string> lits;
            for (size_t k = 0; k < node.fanin.size(); k++)
                lits.push_back((i >> k) & 1 ? node.fanin[k] : inv(node.fanin[k]));
            if (minterms.empty() && ones == 1) {
                g.gates.push_back({GateKind::And, node.output, lits});
            } else {
                std::string m = node.output + "_m" + std::to_string(i);
                g.gates.push_back({GateKind::And, m, lits});
                minterms.push_back(m);
            }
        }
        if (ones > 1)
            g.gates.push_back({GateKind::Or, node.output, minterms});
    }
    for (const auto &l : nl.latches)
        g.gates.push_back({GateKind::Dff, l.out, {l.data}});
    return g;
}

inline void write_bench(const GateNetlist &g, std::ostream &os)
{
    os << "# " << (g.name.empty() ? std::string("netlist") : g.name) << "\n";
    for (const auto &i : g.inputs)
        os << "INPUT(" << i << ")\n";
    for (const auto &o : g.outputs)
        os << "OUTPUT(" << o << ")\n";
    for (const auto &gt : g.gates) {
        os << gt.out << " = " << gate_name(gt.kind) << "(";
        for (size_t i = 0; i < gt.in.size(); i++)
            os << (i ? ", " : "") << gt.in[i];
        os << ")\n";
    }
}

inline std::string write_bench(const Netlist &nl)
{
    std::ostringstream os;
    write_bench(to_gate_netlist(nl), os);
    return os.str();
}

inline GateNetlist parse_bench(std::istream &in)
{
    GateNetlist g;
    std::string line;
    int lineno = 0;
    auto where = [&] { return "line " + std::to_string(lineno); };
    while (std::getline(in, line)) {
        lineno++;
        if (auto h = line.find('#'); h != std::string::npos)
            line = line.substr(0, h);
        // strip whitespace
        std::string s;
        for (char c : line)
            if (!isspace((unsigned char)c))
                s += c;
        if (s.empty())
            continue;
        auto paren = s.find('(');
        if (paren == std::string::npos || s.back() != ')')
            throw SyntaxError("malformed line", where());
        std::string head = s.substr(0, paren);
        std::string args_str = s.substr(paren + 1, s.size() - paren - 2);
        std::vector<std::string> args;
        if (!args_str.empty()) {
            std::istringstream as(args_str);
            std::string a;
            while (std::getline(as, a, ','))
                args.push_back(a);
        }
        if (head == "INPUT") {
            if (args.size() != 1)
                throw SyntaxError("INPUT takes one net", where());
            g.inputs.push_back(args[0]);
        } else if (head == "OUTPUT") {
            if (args.size() != 1)
                throw SyntaxError("OUTPUT takes one net", where());
            g.outputs.push_back(args[0]);
        } else {
            auto eq = head.find('=');
            if (eq == std::string::npos)
                throw SyntaxError("expected assignment", where());
            std::string out = head.substr(0, eq);
            std::string kind_str = head.substr(eq + 1);
            GateKind kind;
            if (kind_str == "AND") kind = GateKind::And;
            else if (kind_str == "OR") kind = GateKind::Or;
            else if (kind_str == "NAND") kind = GateKind::Nand;
            else if (kind_str == "NOR") kind = GateKind::Nor;
            else if (kind_str == "XOR") kind = GateKind::Xor;
            else if (kind_str == "XNOR") kind = GateKind::Xnor;
            else if (kind_str == "NOT") kind = GateKind::Not;
            else if (kind_str == "BUFF" || kind_str == "BUF") kind = GateKind::Buff;
            else if (kind_str == "DFF") kind = GateKind::Dff;
            else if (kind_str == "CONST0") kind = GateKind::Const0;
            else if (kind_str == "CONST1") kind = GateKind::Const1;
            else throw SyntaxError("unknown gate " + kind_str, where());
            if ((kind == GateKind::Not || kind == GateKind::Buff || kind == GateKind::Dff) && args.size() != 1)
                throw SyntaxError(kind_str + " takes one input", where());
            g.gates.push_back({kind, out, args});
        }
    }
    std::set<std::string> driven(g.inputs.begin(), g.inputs.end());
    for (const auto &gt : g.gates)
        if (!driven.insert(gt.out).second)
            throw SemanticError("duplicate driver for net " + gt.out);
    return g;
}

inline GateNetlist parse_bench(const std::string &text)
{
    std::istringstream is(text);
    return parse_bench(is);
}

} // namespace nufab

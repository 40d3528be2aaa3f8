#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nufab/errors.hpp"

namespace nufab {

// A LUT node: `truth[i]` is the output for input pattern i, bit 0 of i being
// the first fanin. Constant nodes have no fanin and a 1-entry table.
struct LogicNode {
    std::string output;
    std::vector<std::string> fanin;
    std::vector<uint8_t> truth;

    bool operator==(const LogicNode &) const = default;
};

struct Latch {
    std::string data;
    std::string out;
    int init = 0; // 0, 1, or 2 for unknown (simulated as 0)

    bool operator==(const Latch &) const = default;
};

struct Netlist {
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<LogicNode> nodes;
    std::vector<Latch> latches;

    bool operator==(const Netlist &) const = default;

    const LogicNode *driver_of(const std::string &net) const
    {
        for (const auto &n : nodes)
            if (n.output == net)
                return &n;
        return nullptr;
    }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string &s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

} // namespace detail

// Parse the flat-module BLIF subset: .model/.inputs/.outputs/.names/.latch/.end.
// Covers are single-output on-set rows over {0,1,-}; `-` expands into the table.
inline Netlist parse_blif(std::istream &in, size_t k_max = 4)
{
    Netlist nl;
    std::string raw, line;
    int lineno = 0, first_lineno = 0;
    bool seen_model = false, seen_end = false;

    // current .names being filled
    LogicNode *cur = nullptr;
    std::vector<int> node_lines, latch_lines;
    int outputs_line = 0;
    auto where = [&](int ln) { return "line " + std::to_string(ln); };

    auto apply_row = [&](const std::string &pattern, int ln) {
        if (!cur)
            throw SyntaxError("cover row outside .names", where(ln));
        if (pattern.size() != cur->fanin.size())
            throw SyntaxError("cover row width mismatch", where(ln));
        // expand '-' eagerly
        std::vector<size_t> free_bits;
        size_t base = 0;
        for (size_t i = 0; i < pattern.size(); i++) {
            char c = pattern[i];
            if (c == '1')
                base |= size_t(1) << i;
            else if (c == '-')
                free_bits.push_back(i);
            else if (c != '0')
                throw SyntaxError("bad cover character", where(ln));
        }
        for (size_t m = 0; m < (size_t(1) << free_bits.size()); m++) {
            size_t idx = base;
            for (size_t j = 0; j < free_bits.size(); j++)
                if (m & (size_t(1) << j))
                    idx |= size_t(1) << free_bits[j];
            cur->truth[idx] = 1;
        }
    };

    while (std::getline(in, raw)) {
        lineno++;
        if (auto h = raw.find('#'); h != std::string::npos)
            raw = raw.substr(0, h);
        // line continuation
        first_lineno = lineno;
        while (!raw.empty() && raw.back() == '\\') {
            raw.pop_back();
            std::string next;
            if (!std::getline(in, next))
                throw SyntaxError("dangling line continuation", where(lineno));
            lineno++;
            raw += next;
        }
        line = raw;
        auto toks = detail::split_ws(line);
        if (toks.empty())
            continue;
        if (seen_end)
            throw SyntaxError("content after .end", where(first_lineno));

        const std::string &head = toks[0];
        if (head[0] == '.') {
            cur = nullptr;
            if (head == ".model") {
                if (seen_model)
                    throw SyntaxError("multiple .model not supported", where(first_lineno));
                seen_model = true;
                if (toks.size() >= 2)
                    nl.name = toks[1];
            } else if (head == ".inputs") {
                nl.inputs.insert(nl.inputs.end(), toks.begin() + 1, toks.end());
            } else if (head == ".outputs") {
                outputs_line = first_lineno;
                nl.outputs.insert(nl.outputs.end(), toks.begin() + 1, toks.end());
            } else if (head == ".names") {
                if (toks.size() < 2)
                    throw SyntaxError(".names needs an output", where(first_lineno));
                LogicNode node;
                node.output = toks.back();
                node.fanin.assign(toks.begin() + 1, toks.end() - 1);
                if (node.fanin.size() > k_max)
                    throw SemanticError("fan-in " + std::to_string(node.fanin.size()) + " exceeds K_max " +
                                            std::to_string(k_max),
                                        where(first_lineno));
                node.truth.assign(size_t(1) << node.fanin.size(), 0);
                nl.nodes.push_back(std::move(node));
                node_lines.push_back(first_lineno);
                cur = &nl.nodes.back();
            } else if (head == ".latch") {
                // .latch <input> <output> [<type> <control>] [<init>]
                if (toks.size() < 3)
                    throw SyntaxError(".latch needs input and output", where(first_lineno));
                Latch l;
                l.data = toks[1];
                l.out = toks[2];
                l.init = 2;
                const std::string &last = toks.back();
                if (toks.size() > 3 && (last == "0" || last == "1" || last == "2" || last == "3"))
                    l.init = (last == "0") ? 0 : (last == "1") ? 1 : 2;
                nl.latches.push_back(l);
                latch_lines.push_back(first_lineno);
            } else if (head == ".end") {
                seen_end = true;
            } else {
                throw SyntaxError("unknown directive " + head, where(first_lineno));
            }
        } else {
            // cover row: pattern [output] or bare output bit for constants
            if (!cur)
                throw SyntaxError("cover row outside .names", where(first_lineno));
            if (cur->fanin.empty()) {
                if (toks.size() != 1 || (toks[0] != "0" && toks[0] != "1"))
                    throw SyntaxError("bad constant cover", where(first_lineno));
                cur->truth[0] = (toks[0] == "1");
            } else {
                if (toks.size() != 2)
                    throw SyntaxError("cover row needs pattern and output", where(first_lineno));
                if (toks[1] != "1")
                    throw SyntaxError("only on-set covers supported", where(first_lineno));
                apply_row(toks[0], first_lineno);
            }
        }
    }

    // semantic checks: unique drivers, everything referenced is driven
    std::set<std::string> driven(nl.inputs.begin(), nl.inputs.end());
    if (driven.size() != nl.inputs.size())
        throw SemanticError("duplicate primary input", where(1));
    for (size_t i = 0; i < nl.latches.size(); i++)
        if (!driven.insert(nl.latches[i].out).second)
            throw SemanticError("duplicate driver for net " + nl.latches[i].out, where(latch_lines[i]));
    for (size_t i = 0; i < nl.nodes.size(); i++)
        if (!driven.insert(nl.nodes[i].output).second)
            throw SemanticError("duplicate driver for net " + nl.nodes[i].output, where(node_lines[i]));
    auto check_driven = [&](const std::string &net, const char *ctx, int ln) {
        if (!driven.count(net))
            throw SemanticError(std::string("undriven net ") + net + " referenced by " + ctx, where(ln));
    };
    for (size_t i = 0; i < nl.nodes.size(); i++)
        for (const auto &f : nl.nodes[i].fanin)
            check_driven(f, "node", node_lines[i]);
    for (size_t i = 0; i < nl.latches.size(); i++)
        check_driven(nl.latches[i].data, "latch", latch_lines[i]);
    for (const auto &o : nl.outputs)
        check_driven(o, "output", outputs_line);
    return nl;
}

inline Netlist parse_blif(const std::string &text, size_t k_max = 4)
{
    std::istringstream is(text);
    return parse_blif(is, k_max);
}

// Evaluate the combinational cone feeding the outputs and latch data inputs.
// `assignment` must cover every primary input and latch output. Returns values
// for all primary outputs and latch data nets.
inline std::map<std::string, bool> eval_netlist(const Netlist &nl, const std::map<std::string, bool> &assignment)
{
    std::map<std::string, const LogicNode *> by_out;
    for (const auto &n : nl.nodes)
        by_out[n.output] = &n;

    std::map<std::string, bool> value;
    for (const auto &i : nl.inputs) {
        auto it = assignment.find(i);
        if (it == assignment.end())
            throw Error("MissingAssignment", "primary input " + i);
        value[i] = it->second;
    }
    for (const auto &l : nl.latches) {
        auto it = assignment.find(l.out);
        if (it == assignment.end())
            throw Error("MissingAssignment", "latch output " + l.out);
        value[l.out] = it->second;
    }

    // iterative DFS with on-stack marking for loop detection
    std::map<std::string, int> state; // 0 new, 1 on stack, 2 done
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
            const LogicNode *node = it->second;
            if (next_child == 0)
                state[net] = 1;
            if (next_child < node->fanin.size()) {
                const std::string &f = node->fanin[next_child++];
                if (!value.count(f)) {
                    if (state[f] == 1)
                        throw Error("CombinationalLoop", "through net " + f);
                    stack.push_back({f, 0});
                }
            } else {
                size_t idx = 0;
                for (size_t i = 0; i < node->fanin.size(); i++)
                    if (value.at(node->fanin[i]))
                        idx |= size_t(1) << i;
                value[net] = node->truth[idx] != 0;
                state[net] = 2;
                stack.pop_back();
            }
        }
    };

    std::map<std::string, bool> result;
    for (const auto &o : nl.outputs) {
        eval_net(o);
        result[o] = value.at(o);
    }
    for (const auto &l : nl.latches) {
        eval_net(l.data);
        result[l.data] = value.at(l.data);
    }
    return result;
}

} // namespace nufab

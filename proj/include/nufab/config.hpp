#pragma once

#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "nufab/errors.hpp"
#include "nufab/layout.hpp"

namespace nufab {

// `key = value` configuration files for fabric template knobs; `#` and `;`
// start comments, unknown keys are rejected so typos fail loudly.
inline ArchTemplate parse_template_config(std::istream &is, ArchTemplate base = {})
{
    ArchTemplate t = base;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        if (auto p = line.find_first_of("#;"); p != std::string::npos)
            line.erase(p);
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        if (trim(line).empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SyntaxError("expected key = value", "line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "io_capacity")
                t.io_capacity = std::stoi(val);
            else if (key == "n_ble")
                t.n_ble = std::stoi(val);
            else if (key == "k")
                t.k = std::stoi(val);
            else if (key == "w_ch")
                t.w_ch = std::stoi(val);
            else if (key == "l1_mix")
                t.l1_mix = std::stod(val);
            else if (key == "clb_inputs")
                t.clb_inputs = std::stoi(val);
            else if (key == "fc_in")
                t.fc_in = std::stod(val);
            else if (key == "fc_out")
                t.fc_out = std::stod(val);
            else if (key == "seed")
                t.seed = std::stoull(val);
            else
                throw SyntaxError("unknown key '" + key + "'", "line " + std::to_string(lineno));
        } catch (const std::invalid_argument &) {
            throw SyntaxError("bad value for '" + key + "'", "line " + std::to_string(lineno));
        }
    }
    return t;
}

} // namespace nufab

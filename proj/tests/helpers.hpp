#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

inline std::string fixture_dir()
{
    const char *e = std::getenv("FIXTURES");
    return e ? e : "tests/fixtures";
}

inline std::string golden_dir()
{
    const char *e = std::getenv("GOLDEN");
    return e ? e : "tests/golden";
}

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture(const std::string &name) { return read_file(fixture_dir() + "/" + name); }

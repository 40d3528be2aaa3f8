#pragma once

#include <stdexcept>
#include <string>

namespace nufab {

// Base class for all domain errors raised by the toolchain. `where` carries
// file/line context when the error originates from a text input.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string &msg, std::string where = {})
        : std::runtime_error(where.empty() ? kind + ": " + msg : kind + ": " + msg + " (" + where + ")"),
          kind_(std::move(kind)), where_(std::move(where))
    {
    }

    const std::string &kind() const { return kind_; }
    const std::string &where() const { return where_; }

  private:
    std::string kind_;
    std::string where_;
};

class SyntaxError : public Error {
  public:
    SyntaxError(const std::string &msg, std::string where = {}) : Error("SyntaxError", msg, std::move(where)) {}
};

class SemanticError : public Error {
  public:
    SemanticError(const std::string &msg, std::string where = {}) : Error("SemanticError", msg, std::move(where)) {}
};

class RangeError : public Error {
  public:
    RangeError(const std::string &msg, std::string where = {}) : Error("RangeError", msg, std::move(where)) {}
};

} // namespace nufab

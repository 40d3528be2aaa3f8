#pragma once

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "nufab/errors.hpp"

namespace nufab::xml {

// Minimal XML subset used by the architecture files this tool emits: nested
// elements with double-quoted attributes, comments, no text nodes or escapes.
struct Node {
    std::string name;
    std::map<std::string, std::string> attrs;
    std::vector<Node> children;

    const std::string &attr(const std::string &key) const
    {
        auto it = attrs.find(key);
        if (it == attrs.end())
            throw SyntaxError("missing attribute " + key + " on <" + name + ">");
        return it->second;
    }

    int iattr(const std::string &key) const { return std::stoi(attr(key)); }

    const Node *find(const std::string &child_name) const
    {
        for (const auto &c : children)
            if (c.name == child_name)
                return &c;
        return nullptr;
    }

    const Node &get(const std::string &child_name) const
    {
        const Node *n = find(child_name);
        if (!n)
            throw SyntaxError("missing element <" + child_name + "> in <" + name + ">");
        return *n;
    }
};

class Parser {
  public:
    explicit Parser(const std::string &text) : s_(text) {}

    Node parse()
    {
        skip_misc();
        Node root = parse_element();
        skip_misc();
        if (pos_ != s_.size())
            throw SyntaxError("trailing content after root element");
        return root;
    }

  private:
    void skip_ws()
    {
        while (pos_ < s_.size() && isspace((unsigned char)s_[pos_]))
            pos_++;
    }

    void skip_misc()
    {
        for (;;) {
            skip_ws();
            if (s_.compare(pos_, 4, "<!--") == 0) {
                auto end = s_.find("-->", pos_);
                if (end == std::string::npos)
                    throw SyntaxError("unterminated comment");
                pos_ = end + 3;
            } else if (s_.compare(pos_, 2, "<?") == 0) {
                auto end = s_.find("?>", pos_);
                if (end == std::string::npos)
                    throw SyntaxError("unterminated declaration");
                pos_ = end + 2;
            } else {
                return;
            }
        }
    }

    std::string parse_name()
    {
        size_t start = pos_;
        while (pos_ < s_.size() && (isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_' || s_[pos_] == '-'))
            pos_++;
        if (pos_ == start)
            throw SyntaxError("expected name at offset " + std::to_string(pos_));
        return s_.substr(start, pos_ - start);
    }

    Node parse_element()
    {
        if (pos_ >= s_.size() || s_[pos_] != '<')
            throw SyntaxError("expected '<' at offset " + std::to_string(pos_));
        pos_++;
        Node node;
        node.name = parse_name();
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size())
                throw SyntaxError("unterminated element <" + node.name + ">");
            if (s_[pos_] == '/') {
                if (s_.compare(pos_, 2, "/>") != 0)
                    throw SyntaxError("malformed tag end");
                pos_ += 2;
                return node;
            }
            if (s_[pos_] == '>') {
                pos_++;
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '=')
                throw SyntaxError("expected '=' after attribute " + key);
            pos_++;
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '"')
                throw SyntaxError("expected '\"' in attribute " + key);
            pos_++;
            auto end = s_.find('"', pos_);
            if (end == std::string::npos)
                throw SyntaxError("unterminated attribute value");
            node.attrs[key] = s_.substr(pos_, end - pos_);
            pos_ = end + 1;
        }
        // children until closing tag
        for (;;) {
            skip_misc();
            if (s_.compare(pos_, 2, "</") == 0) {
                pos_ += 2;
                std::string close = parse_name();
                if (close != node.name)
                    throw SyntaxError("mismatched closing tag </" + close + "> for <" + node.name + ">");
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != '>')
                    throw SyntaxError("malformed closing tag");
                pos_++;
                return node;
            }
            node.children.push_back(parse_element());
        }
    }

    const std::string &s_;
    size_t pos_ = 0;
};

inline Node parse(const std::string &text) { return Parser(text).parse(); }

} // namespace nufab::xml

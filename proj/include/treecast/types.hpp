#pragma once

#include <stdexcept>
#include <string>

namespace treecast {

using NodeId = int;  // dense, [0, num_nodes)
using LinkId = int;  // dense, [0, num_links)

// Malformed input text; line numbers are 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Input that parses but violates a model invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad scenario configuration or parameter combination.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Instance exceeds the size bound of an exhaustive oracle.
class SizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Problems with the network description itself (missing file, bad edge
// list); kept distinct from ConfigError so the CLI can report them apart.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace treecast

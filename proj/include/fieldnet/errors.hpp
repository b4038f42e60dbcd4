#pragma once

#include <stdexcept>
#include <string>

namespace fieldnet {

/// Invalid configuration or structurally inconsistent input (bad sizes,
/// unknown names, mismatched dimensions). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what, long line = -1)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

/// Non-finite or otherwise unusable numeric input.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A run that cannot proceed (e.g. no estimable starting design was found).
/// Maps to CLI exit code 2.
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fieldnet

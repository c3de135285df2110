#pragma once

#include <stdexcept>
#include <string>

namespace privaudio {

/// Precondition violation on an operation input.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

/// File or format failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or contradictory scenario configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A dimension / rank feasibility check failed (margin carries how badly).
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& msg, long margin)
        : std::runtime_error(msg), margin_(margin) {}
    long margin() const { return margin_; }

private:
    long margin_;
};

}  // namespace privaudio

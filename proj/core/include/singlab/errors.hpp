#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace singlab {

/// Invalid configuration or precondition violation (CLI exit status 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(key) {}

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Iterative solve did not reach its tolerance (CLI exit status 3).
/// Carries the residual/width history so the caller can diagnose stiffness.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace singlab

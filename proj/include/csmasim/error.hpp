#pragma once

#include <stdexcept>
#include <string>

namespace csmasim {

// Malformed or out-of-range scenario configuration. `where` names the
// offending field (JSON pointer style) or file location.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)), detail_(what) {}

    const std::string& where() const noexcept { return where_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string where_;
    std::string detail_;
};

// A placement-based generator could not produce the requested flows.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The oracle refuses a topology (too many links, degenerate region).
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace csmasim

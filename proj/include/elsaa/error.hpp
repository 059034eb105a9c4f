#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace elsaa {

/// A numerical routine stopped before meeting its tolerance.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data cannot be used (unreadable file, malformed CSV, wrong shape).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration document failed validation. Carries every problem found.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

} // namespace elsaa

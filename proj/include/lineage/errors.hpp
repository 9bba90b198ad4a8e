#pragma once

#include <stdexcept>
#include <string>

namespace lineage {

// Invalid configuration (bad flag values, impossible schedules, shape
// mismatches between a config and a stored artifact). CLI maps this to
// exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values in a forward pass or a loss. CLI maps this to exit
// code 2 and aborts the run without touching final output files.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke a documented precondition. These are programming errors,
// not user errors.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace lineage

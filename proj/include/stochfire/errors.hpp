#pragma once

#include <stdexcept>
#include <string>

namespace stochfire {

// Exit-code contract used by the CLI: usage errors exit 1, input/format
// errors exit 2, internal invariant violations exit 3.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SeedingError : std::runtime_error {
    explicit SeedingError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an oracle forecaster would be scored on realizations it was
// fitted on, or when paired ensembles do not share an initial condition.
struct ContaminationError : std::runtime_error {
    explicit ContaminationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InternalError : std::logic_error {
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace stochfire

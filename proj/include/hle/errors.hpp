#pragma once

#include <stdexcept>
#include <string>

namespace hle {

/// Malformed configuration or misuse of an API contract (CLI exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Problem parameters fail the admissibility conditions (CLI exit code 2).
struct InadmissibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A solver failed to converge or hit a numerical breakdown (CLI exit code 3).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hle

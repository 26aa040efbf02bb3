#pragma once

#include <stdexcept>
#include <string>

namespace quanvnet {

/// Invalid configuration or argument (bad qubit count, unknown gate, wrong arity).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input data violates a precondition (pixel out of range, wrong image shape).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A file could not be read or decoded.
struct IngestionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A binary artifact (cache, checkpoint) is malformed, truncated or of the wrong version.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace quanvnet

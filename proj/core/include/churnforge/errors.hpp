#pragma once

#include <stdexcept>

namespace churnforge {

// Base class for every failure raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A domain invariant was violated while constructing a value.
struct ValidationError : Error {
    using Error::Error;
};

// The input's header/structure is unusable (fatal, unlike per-line rejects).
struct SchemaError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// A knob has an unacceptable value (even k, n_workers < 2, ...).
struct ConfigError : Error {
    using Error::Error;
};

// The caller broke an operation precondition.
struct PreconditionError : Error {
    using Error::Error;
};

// Pearson correlation is undefined (zero variance in an input).
struct UndefinedCorrelationError : Error {
    using Error::Error;
};

// The split sweep could not produce a usable train/test draw.
struct EvaluationError : Error {
    using Error::Error;
};

} // namespace churnforge

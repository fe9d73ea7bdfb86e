#pragma once

#include <stdexcept>
#include <string>

namespace tnlab {

/// Bad user input: malformed config, violated precondition, unsupported size.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A scalar model produced a non-finite value or failed its validity checks.
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal consistency check failed (algebraic identity residual blow-up,
/// impossible branch). Indicates a bug or a broken model, not bad input.
struct internal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tnlab

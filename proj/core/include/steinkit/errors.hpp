#pragma once

#include <stdexcept>
#include <string>

namespace steinkit {

// Error taxonomy mirrors the CLI exit codes: parse -> 2, incompatibility -> 3,
// budget -> 4, soundness -> 5.

struct SteinkitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : SteinkitError {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos = 0)
        : SteinkitError(msg), position(pos) {}
};

// Inputs that cannot be combined: mismatched supports, uncentered test
// functions where centering is required, functions failing class membership.
struct IncompatibilityError : SteinkitError {
    using SteinkitError::SteinkitError;
};

// Subdivision / enumeration budgets exceeded, non-convergent integrals.
struct BudgetError : SteinkitError {
    using SteinkitError::SteinkitError;
};

// Internal consistency violated (an identity check failed, a bound fell
// below its oracle). Always indicates a bug, never a user error.
struct SoundnessError : SteinkitError {
    using SteinkitError::SteinkitError;
};

} // namespace steinkit

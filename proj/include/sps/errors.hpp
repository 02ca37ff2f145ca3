#pragma once

#include <stdexcept>
#include <string>

namespace sps {

// Malformed or unknown configuration input (unknown key, bad syntax, unknown scenario).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An operation was called with arguments outside its stated domain.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation failed to converge or produced non-finite results.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sps

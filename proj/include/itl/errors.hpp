#pragma once

#include <stdexcept>
#include <string>

namespace itl {

/// An operation was called outside its domain (zero modulus, non-split prime, ...).
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A tower file or other external input does not match its schema.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace itl

#pragma once

#include <stdexcept>
#include <string>

namespace bioel {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad flags, bad config keys/values, unsupported operation requests. Exit 2.
struct ConfigError : Error {
  using Error::Error;
};

// Missing or malformed files, unresolvable ids, empty datasets. Exit 3.
struct DataError : Error {
  using Error::Error;
};

// Violated numeric or shape invariants (non-finite values, mismatched
// dimensions, misuse of the graph API). Exit 4.
struct InvariantError : Error {
  using Error::Error;
};

}  // namespace bioel

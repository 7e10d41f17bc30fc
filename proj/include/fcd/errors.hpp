#pragma once

#include <stdexcept>
#include <string>

namespace fcd {

/// Caller supplied something that violates a precondition (empty cloud,
/// dimension mismatch, out-of-range parameter).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be opened or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Divergence, non-finite values, or an ambiguous configuration.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace detail
}  // namespace fcd

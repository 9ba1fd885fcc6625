#pragma once

#include <stdexcept>
#include <string>

namespace apldf {

/// Malformed input document (route file, drive log, params, cohort).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Document parsed but violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query outside the domain of a map or profile.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Operation not allowed in the current simulation or session state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace apldf

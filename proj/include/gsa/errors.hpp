#pragma once

#include <stdexcept>
#include <string>

namespace gsa {

// Base class for all toolkit errors so callers can catch the whole family.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Model or design dimension outside the supported range.
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

// Input point has a coordinate outside the unit cube.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Requested more sequence dimensions than the direction table provides.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

// All outputs identical to machine precision; indices are undefined.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

// Second-order pair (i, j) with i == j or an index out of range.
class InvalidPair : public Error {
 public:
  using Error::Error;
};

// Bootstrap replicate count below the minimum of two.
class InvalidReplicates : public Error {
 public:
  using Error::Error;
};

// Correlation matrix could not be factored even at the nugget cap.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

// Fewer training points than the fit requires.
class TooFewPoints : public Error {
 public:
  using Error::Error;
};

// A report needs a grid cell that has not been computed.
class IncompleteCell : public Error {
 public:
  using Error::Error;
};

}  // namespace gsa

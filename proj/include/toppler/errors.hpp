#pragma once

#include <stdexcept>
#include <string>

namespace toppler {

// Invalid vertex key for a family, or malformed graph spec.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Toppling more mass than present, or a non-positive amount.
class InvalidMove : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameters outside an operation's domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A size or iteration guard was hit.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Kernel lookup outside the computed box.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Operation not defined for this graph family.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// File could not be written or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace toppler

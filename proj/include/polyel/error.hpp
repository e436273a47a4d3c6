#pragma once

#include <stdexcept>
#include <string>

namespace polyel {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration (bad grid, non-orthogonal rotation, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Argument outside the region where a formula is defined (e.g. T <= 1 for log T).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Too many node pairs closer than the clamp distance.
class DegeneratePathError : public Error {
public:
  using Error::Error;
};

/// Incrementally maintained state disagrees with a full recomputation.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

}  // namespace polyel

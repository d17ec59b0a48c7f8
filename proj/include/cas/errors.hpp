#pragma once

#include <stdexcept>
#include <string>

namespace cas {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something outside an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A relation that has no sentence template reached verbalization.
class UntemplatedRelation : public Error {
 public:
  using Error::Error;
};

// The model server could not be reached or answered with a non-2xx status.
// Retried a bounded number of times before it surfaces.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The model backend rejected or could not process an input (e.g. a
// continuation that tokenizes to nothing).
class BackendInputError : public Error {
 public:
  using Error::Error;
};

// Dataset or configuration files that cannot be used at all.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace cas

#pragma once

#include <stdexcept>
#include <string>

namespace weakeq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical evaluation produced a non-finite value or could not be carried out.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A root could not be bracketed.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// The second-order coefficient of a Hamiltonian vanishes, so its supremum over
/// an unbounded control set is not attained.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

}  // namespace weakeq

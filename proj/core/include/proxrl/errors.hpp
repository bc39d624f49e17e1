#pragma once

#include <stdexcept>
#include <string>

namespace proxrl {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape, range, stochasticity).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A policy names an action outside the MDP's action set.
class InvalidPolicy : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An iterative routine hit its iteration cap before meeting its tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A linear solve that should be well posed failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace proxrl

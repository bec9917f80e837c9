#pragma once

#include <stdexcept>
#include <string>

namespace desitter {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The point sits on (or numerically at) the coordinate sphere sigma^2 = 4 ell^2.
class ChartSingularity : public Error {
 public:
  using Error::Error;
};

/// The bulk point violates <X,X> = -ell^2 beyond tolerance.
class NotOnBrane : public Error {
 public:
  using Error::Error;
};

/// The bulk point has X^4 = ell and has no conformal coordinates.
class NorthPole : public Error {
 public:
  using Error::Error;
};

/// A bulk state failed <X,X> = -ell^2 or <X,V> = 0.
class ConstraintViolated : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

}  // namespace desitter

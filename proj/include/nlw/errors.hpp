#pragma once

#include <stdexcept>
#include <string>

namespace nlw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(int lhs, int rhs)
      : Error("dimension mismatch: " + std::to_string(lhs) + " vs " +
              std::to_string(rhs)) {}
};

/// State-validation failures carry the offending magnitude.
class StateError : public Error {
 public:
  StateError(const std::string& what, double magnitude)
      : Error(what + " (magnitude " + std::to_string(magnitude) + ")"),
        magnitude_(magnitude) {}
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

class NotHermitian : public StateError {
 public:
  explicit NotHermitian(double m) : StateError("matrix is not Hermitian", m) {}
};

class TraceNotOne : public StateError {
 public:
  explicit TraceNotOne(double m) : StateError("trace differs from one", m) {}
};

class NotPositive : public StateError {
 public:
  explicit NotPositive(double m)
      : StateError("matrix has a negative eigenvalue", m) {}
};

class DegenerateModel : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  IllConditioned(double condition)
      : Error("control system is ill-conditioned (condition number " +
              std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class InputNotClassical : public Error {
 public:
  using Error::Error;
};

}  // namespace nlw

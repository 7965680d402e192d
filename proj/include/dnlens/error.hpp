#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dnlens {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates an operation's contract. The CLI maps this to exit status 2.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class GlancingError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class CflViolation : public PreconditionError {
 public:
  CflViolation(double dt, double bound)
      : PreconditionError("CFL violation: dt = " + std::to_string(dt) +
                          " exceeds bound 0.5*dx/max(c) = " + std::to_string(bound)),
        dt_(dt), bound_(bound) {}
  double dt() const { return dt_; }
  double bound() const { return bound_; }

 private:
  double dt_;
  double bound_;
};

// Non-finite values produced during integration. Exit status 3.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class DetectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace dnlens

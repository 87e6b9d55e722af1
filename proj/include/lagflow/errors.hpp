#pragma once

#include <stdexcept>
#include <string>

namespace lagflow {

/// Base class for everything the library throws on a broken contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: wrong length, out-of-range parameter, non-finite value.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// inf J fell to or below the admissible floor.
class JacobianDegeneracy : public Error {
 public:
  JacobianDegeneracy(const std::string& what, double inf_J, double t = 0.0)
      : Error(what), inf_J_(inf_J), t_(t) {}
  double inf_J() const { return inf_J_; }
  double time() const { return t_; }

 private:
  double inf_J_;
  double t_;
};

/// Damped Newton did not reach the residual tolerance.
class NewtonFailure : public Error {
 public:
  NewtonFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The per-step fixed-point map did not contract within the iteration cap.
class NonContraction : public Error {
 public:
  NonContraction(const std::string& what, double t = 0.0) : Error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// Local Gronwall bound evaluated past its blow-up time.
class HorizonExceeded : public Error {
 public:
  HorizonExceeded(const std::string& what, double critical_time)
      : Error(what), critical_time_(critical_time) {}
  double critical_time() const { return critical_time_; }

 private:
  double critical_time_;
};

}  // namespace lagflow

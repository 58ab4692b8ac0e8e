#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace bms {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (dimension mismatch, bad argument).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

// P, Q (or priors) not symmetric positive definite, or a non-positive R^i.
class WeightError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, int pivot, double condition_estimate)
      : Error(what), pivot_(pivot), condition_estimate_(condition_estimate) {}
  int pivot() const { return pivot_; }
  double condition_estimate() const { return condition_estimate_; }

 private:
  int pivot_;
  double condition_estimate_;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, Eigen::VectorXd last_iterate, double residual)
      : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}
  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
};

// Phase-1 optimum was nonnegative: no strictly feasible point exists.
class InfeasibleProblem : public Error {
 public:
  InfeasibleProblem(const std::string& what, double phase1_optimum)
      : Error(what), phase1_optimum_(phase1_optimum) {}
  double phase1_optimum() const { return phase1_optimum_; }

 private:
  double phase1_optimum_;
};

class NoObservability : public Error {
 public:
  using Error::Error;
};

// Cost callable returned NaN/Inf.
class CallableError : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, int triangle) : Error(what), triangle_(triangle) {}
  int triangle() const { return triangle_; }

 private:
  int triangle_;
};

class LocationError : public Error {
 public:
  LocationError(const std::string& what, double xi, double eta) : Error(what), xi_(xi), eta_(eta) {}
  double xi() const { return xi_; }
  double eta() const { return eta_; }

 private:
  double xi_;
  double eta_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bms

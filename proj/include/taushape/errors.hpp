#pragma once

#include <stdexcept>
#include <string>

namespace taushape {

// Base class for all taushape errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite or out-of-domain argument (bad beta shapes, probabilities
// outside (0,1), ...).
struct InvalidParameter : Error {
  using Error::Error;
};

// An operation received an empty draw vector or dataset.
struct EmptyInput : Error {
  using Error::Error;
};

// Config / file schema violation. Message carries the field path.
struct SchemaError : Error {
  using Error::Error;
};

// Too few scenarios (distinct n or delta values) to identify a stage-2 fit.
struct InsufficientDesign : Error {
  using Error::Error;
};

// Laplace fit reached a point whose negative Hessian is not positive definite.
struct CurvatureError : Error {
  using Error::Error;
};

// MCMC could not find a finite-density initial point.
struct InitializationError : Error {
  using Error::Error;
};

// File read/write failure.
struct IoError : Error {
  using Error::Error;
};

// Mismatched grids or otherwise inconsistent inputs to an oc-engine call.
struct ConfigurationError : Error {
  using Error::Error;
};

// Two scenarios with the same key fed to build_quantile_matrix.
struct DuplicateScenario : Error {
  using Error::Error;
};

// Effect value on the wrong side of the null boundary.
struct DirectionError : Error {
  using Error::Error;
};

// Sample-size search target not attainable within the given range.
class UnreachableTarget : public Error {
 public:
  UnreachableTarget(const std::string& msg, double max_achieved)
      : Error(msg), max_achieved_(max_achieved) {}
  double max_achieved() const { return max_achieved_; }

 private:
  double max_achieved_;
};

}  // namespace taushape

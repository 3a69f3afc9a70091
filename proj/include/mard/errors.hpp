#ifndef MARD_ERRORS_HPP_
#define MARD_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mard {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

// Invalid argument values: bad hyperparameters, levels outside (0,1),
// dimension mismatches and the like.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string &what) : Error(what) {}
};

// Malformed or degenerate input data: empty datasets, constant series,
// unreadable files.
class DataError : public Error {
 public:
  explicit DataError(const std::string &what) : Error(what) {}
};

// Numerical failures at run time: non-finite intermediates, factorization
// failures, iteration caps.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string &what) : Error(what) {}
};

// A matrix that must be invertible / positive definite is not.
class SingularityError : public NumericalError {
 public:
  explicit SingularityError(const std::string &what) : NumericalError(what) {}
};

// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public NumericalError {
 public:
  explicit ConvergenceError(const std::string &what) : NumericalError(what) {}
};

}  // namespace mard

#endif  // MARD_ERRORS_HPP_

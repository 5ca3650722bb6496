#ifndef DMD_TYPES_HPP
#define DMD_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dmd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the set an operation requires it to be in.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed construction parameters or configuration records.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver exhausted its budget. Carries the last iterate.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Vector last_iterate,
                      double residual)
      : Error(what), last_iterate_(std::move(last_iterate)),
        residual_(residual) {}

  const Vector& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Vector last_iterate_;
  double residual_;
};

}  // namespace dmd

#endif  // DMD_TYPES_HPP

#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace curvlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

/// A component array that breaks one of the curvature identities.
class SymmetryError : public Error {
 public:
  SymmetryError(std::string identity, double violation, std::array<int, 4> index)
      : Error("symmetry violation: " + identity + " off by " + std::to_string(violation) +
              " at (" + std::to_string(index[0]) + "," + std::to_string(index[1]) + "," +
              std::to_string(index[2]) + "," + std::to_string(index[3]) + ")"),
        identity_(std::move(identity)),
        violation_(violation),
        index_(index) {}

  const std::string& identity() const noexcept { return identity_; }
  double violation() const noexcept { return violation_; }
  const std::array<int, 4>& index() const noexcept { return index_; }

 private:
  std::string identity_;
  double violation_;
  std::array<int, 4> index_;
};

/// Raised when an eigenvalue branch cannot be followed (multiplicity > 1,
/// crossing inside the finite-difference window, irregular endpoint).
class BranchError : public Error {
 public:
  using Error::Error;
};

}  // namespace curvlab

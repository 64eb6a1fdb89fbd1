#pragma once

#include <stdexcept>
#include <string>

namespace rigid_refine {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructor precondition was violated (empty cloud, non-finite value,
/// non-positive weight, matrix outside SO(3), ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Correspondences do not pin down a rotation (two vanishing singular values
/// of the cross-covariance).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// The 15x15 KKT matrix is numerically singular.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// The rotation assembler received collinear (or vanishing) leading columns.
class CollinearColumns : public Error {
 public:
  using Error::Error;
};

/// Singular values of the cross-covariance are too close for a meaningful
/// SVD gradient.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// G = sum w pt pt^T is too close to singular to form the unconstrained solution.
class NearSingularG : public Error {
 public:
  using Error::Error;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

class MismatchedSpecs : public Error {
 public:
  using Error::Error;
};

/// Configuration or file I/O failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rigid_refine

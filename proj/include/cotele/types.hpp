#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cotele {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Absolute per-entry tolerance for treating two mode vectors as the same.
inline constexpr double kDedupTol = 1e-12;
/// Tolerance for the structural identities of a splitting.
inline constexpr double kStructureTol = 1e-12;
/// Default tolerance for exact-identity checks on Fock-space quantities.
inline constexpr double kIdentityTol = 1e-10;
/// Default relative eigenvalue cutoff used when orthonormalizing a dictionary.
inline constexpr double kGramCutoff = 1e-12;
/// Denominators below this are reported as zero-probability events.
inline constexpr double kZeroProbability = 1e-14;
/// Smallest admissible beam density.
inline constexpr double kMinDensity = 0.05;
/// Default cap on the input dimension N.
inline constexpr int kMaxDimension = 8;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class NormViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateDictionary : public Error {
 public:
  using Error::Error;
};

class ZeroProbability : public Error {
 public:
  using Error::Error;
};

class UndefinedAction : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ResourceLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace cotele

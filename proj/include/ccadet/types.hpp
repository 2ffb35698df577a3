#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ccadet {

/// Dense 2-D arrays with explicit row/column semantics. Rows are whatever the
/// operation documents (antennas, time samples, ...); columns likewise. All
/// numerics run in double precision.
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Deterministic generator used throughout. Every randomized routine takes one
/// of these by reference so callers control the stream.
using Rng = std::mt19937_64;

/// Creates the per-trial RNG stream for (seed, trial_index). Trials own
/// disjoint streams; identical (seed, index) pairs reproduce identical draws.
inline Rng make_trial_rng(std::uint64_t seed, std::uint64_t trial_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial_index),
                    static_cast<std::uint32_t>(trial_index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Shape/argument violations (mismatched dimensions, invalid counts).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failures (singular matrices, non-identifiable factorizations).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration (scenario files, constants files, bad parameters).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Refusal to enumerate past a configured cap (maximum-likelihood search).
class EnumerationCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
/// "name (RxC)" fragment for error messages.
std::string shape_str(const char* name, Eigen::Index rows, Eigen::Index cols);
}  // namespace detail

}  // namespace ccadet

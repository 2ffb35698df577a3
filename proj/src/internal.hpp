#pragma once

#include <Eigen/Cholesky>

#include "ccadet/types.hpp"

namespace ccadet::internal {

/// Validates a sample auto-correlation block (square, symmetric to 1e-10).
void check_correlation(const RealMatrix& r, const char* name);

/// Cholesky factor of r + ridge·I, gated on positive definiteness and a
/// condition number below 1e12; the error suggests a larger ridge.
Eigen::LLT<RealMatrix> whitener(const RealMatrix& r, double ridge, const char* name);

}  // namespace ccadet::internal

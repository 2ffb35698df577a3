#pragma once

#include <vector>

#include "ccadet/types.hpp"

namespace ccadet {

/// Rows×k_e real mixture G = S·P with S ∈ {±1} and P an unknown nonsingular
/// mixing. Rows are (possibly stacked) time samples.
struct MixtureBlock {
  RealMatrix g;
  int k_e = 0;
};

/// Minimum row count accepted by racma_factorize: max(2·k_e², 8) — enough
/// rows for the constant-modulus null-space step with margin.
int racma_min_rows(int k_e);

/// Factorization result. s_hat has entries exactly ±1; mixing_hat is the
/// least-squares k_e×k_e mixing for s_hat; residual = ‖G − Ŝ·P̂‖_F. The
/// estimate is unique only up to a signed column permutation.
struct UnmixResult {
  RealMatrix s_hat;
  RealMatrix mixing_hat;
  double residual = 0.0;
};

/// Real analytical constant-modulus separation of binary sources:
///   1. column-whiten G by its thin SVD (rank check — rank < k_e is a
///      non-identifiable mixture and raises NumericalError);
///   2. build the quadratic constant-modulus condition system from the
///      whitened row outer-products;
///   3. take the k_e-dimensional null space of the row-centred system;
///   4. recover the unmixing from the eigendecomposition of a random linear
///      combination of the de-stacked null-space basis matrices (coefficients
///      from a fixed internal stream, one re-draw if eigenvalues cluster);
///   5. project to ±1 and run one alternating-least-squares refinement sweep
///      (re-fit P, re-project S).
/// Deterministic: identical inputs give identical outputs.
UnmixResult racma_factorize(const MixtureBlock& g);

/// Rank-k_e subspace front-end: reduces a realified antenna-domain block
/// (rows = 2M, cols = T) to the T×k_e dominant mixture via a thin SVD.
MixtureBlock reduce_to_mixture(const RealMatrix& stacked, int k_e);

/// Signed column matching of an estimate against a reference (both ±1,
/// equal shape): permutation and signs maximizing the total |correlation|
/// (exact assignment for k ≤ 8, greedy above; ties prefer the lower column
/// index). aligned = estimate with the permutation and signs applied.
struct Alignment {
  std::vector<int> permutation;  ///< aligned column j = estimate column permutation[j]
  RealVector signs;
  RealMatrix aligned;
};

Alignment resolve_ambiguity(const RealMatrix& s_hat, const RealMatrix& s_ref);

/// Exhaustive constant-modulus oracle: enumerates sign-normalized ±1 source
/// matrices and returns the global least-squares optimum. Only for tiny
/// problems (t ≤ 16, k_e ≤ 2); anything larger is refused with
/// DimensionError naming the limits.
UnmixResult cm_oracle_factorize(const RealMatrix& g, int k_e);

}  // namespace ccadet

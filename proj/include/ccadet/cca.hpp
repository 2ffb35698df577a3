#pragma once

#include <optional>
#include <vector>

#include "ccadet/types.hpp"

namespace ccadet {

/// One view of the two-view problem: a real-stacked receive block whose rows
/// are 2·M (real parts over imaginary parts) and whose columns are the T time
/// samples. view_id is 1 or 2.
struct ViewMatrix {
  RealMatrix data;
  int view_id = 1;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
};

/// Validates view_id and wraps the data.
ViewMatrix make_view(RealMatrix data, int view_id);

/// Per-row mean removal; returns a new view, the input is untouched. Off by
/// default in the pipeline (BPSK sources are zero-mean by construction).
ViewMatrix center_rows(const ViewMatrix& y);

/// Sample auto-/cross-correlations of two equal-length views:
/// r11 = Y1·Y1ᵀ/T, r22 = Y2·Y2ᵀ/T, r12 = Y1·Y2ᵀ/T.
struct CorrelationSet {
  RealMatrix r11;
  RealMatrix r22;
  RealMatrix r12;

  Eigen::Index dim1() const { return r11.rows(); }
  Eigen::Index dim2() const { return r22.rows(); }
};

CorrelationSet sample_correlations(const ViewMatrix& y1, const ViewMatrix& y2);

/// Canonical directions and correlations. Columns of q1 (dim1×N) and q2
/// (dim2×N) satisfy qᵀ·(rℓℓ + ridge·I)·q = I; rho holds the N canonical
/// correlations sorted descending, each in [0, 1] up to roundoff.
struct CanonicalSolution {
  RealMatrix q1;
  RealMatrix q2;
  RealVector rho;
  double ridge = 0.0;
};

/// Default Tikhonov ridge for a correlation set: 1e-8 times the mean of
/// trace(rℓℓ)/dimℓ over the two views. Covers finite-sample rank deficiency
/// without affecting well-conditioned problems.
double default_ridge(const CorrelationSet& corr);

/// Solves the two-view canonical correlation problem for the top n_components
/// pairs by Cholesky whitening of the regularized auto-correlations followed
/// by an SVD of the whitened cross-correlation. The view-2 directions equal
/// the recovery q2 = r22⁻¹·r21·q1/ρ renormalized to unit view-2 variance
/// (identical by algebra; the SVD route also covers ρ = 0). Column signs are
/// fixed deterministically: the largest-magnitude entry of each q1 column is
/// made positive (first such entry on ties), with the matching q2 column
/// flipped alongside so correlations stay non-negative.
///
/// Throws DimensionError for impossible n_components and NumericalError when
/// a regularized auto-correlation is not positive definite with condition
/// number below 1e12 (the message suggests a larger ridge).
CanonicalSolution solve_cca(const CorrelationSet& corr, int n_components,
                            double ridge);

/// Threshold-based model-order selector: number of leading correlations with
/// rho[n] >= rho_min (rho must be sorted descending).
int select_components(const RealVector& rho, double rho_min = 0.5);

/// Convenience: solve at the largest admissible order, then truncate to the
/// components with rho >= rho_min.
CanonicalSolution solve_cca_auto(const CorrelationSet& corr,
                                 double rho_min = 0.5,
                                 std::optional<double> ridge = std::nullopt);

/// Projects a view onto canonical directions: returns Yᵀ·Q (T×N).
RealMatrix project(const ViewMatrix& y, const RealMatrix& q);

/// Sum of squared Frobenius distances between each projection and the common
/// target: Σℓ ‖Pℓ − G‖²_F.
double maxvar_objective(const RealMatrix& g,
                        const std::vector<RealMatrix>& projections);

}  // namespace ccadet

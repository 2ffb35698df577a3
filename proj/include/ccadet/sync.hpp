#pragma once

#include <array>
#include <optional>
#include <utility>

#include "ccadet/cca.hpp"
#include "ccadet/types.hpp"

namespace ccadet {

/// Dominant canonical pair by power iteration on the whitened cross-
/// correlation (no full eigendecomposition). converged is false when the
/// residual criterion was not met within max_iters — a flagged result, never
/// an exception.
struct PowerIterResult {
  double rho1 = 0.0;
  RealVector q1;
  RealVector q2;
  bool converged = false;
  int iterations = 0;
};

PowerIterResult first_canonical_correlation(const ViewMatrix& y1,
                                            const ViewMatrix& y2,
                                            std::optional<double> ridge = std::nullopt,
                                            int max_iters = 200,
                                            double tol = 1e-6);

/// Result of the correlation-peak delay search: rho1[i] for candidate offset
/// offsets[i], the argmax tau_star (ties broken toward the smaller offset),
/// and peak_found = false when max rho1 falls below the no-peak threshold
/// (0.5·γe/(γe+1) when gamma_e is given, else 0.4). solves counts the
/// dominant-pair evaluations (exactly one per candidate offset).
struct SyncTrace {
  std::vector<int> offsets;
  RealVector rho1;
  int tau_star = 0;
  std::array<int, 2> window{0, 0};
  int tau1_anchor = 0;
  bool peak_found = false;
  int solves = 0;
};

/// Blind frame synchronization (Algorithm 2): hold view 1 at tau1_anchor,
/// sweep the view-2 offset over window = [w_L, w_R] (inclusive), score each
/// candidate by the first canonical correlation of the two t_block-column
/// slices, and pick the peak. Views are realified long blocks (2M × T̃).
SyncTrace cca_sync(const ViewMatrix& y1_long, const ViewMatrix& y2_long,
                   int t_block, std::array<int, 2> window, int tau1_anchor = 0,
                   std::optional<double> ridge = std::nullopt,
                   std::optional<double> gamma_e = std::nullopt);

/// Cuts the aligned t_block-column pair (view 1 at the anchor, view 2 at
/// tau_star) ready for the detection pipeline.
std::pair<ViewMatrix, ViewMatrix> align_and_extract(const ViewMatrix& y1_long,
                                                    const ViewMatrix& y2_long,
                                                    const SyncTrace& trace,
                                                    int t_block);

}  // namespace ccadet

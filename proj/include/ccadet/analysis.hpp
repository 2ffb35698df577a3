#pragma once

#include <optional>
#include <vector>

#include "ccadet/types.hpp"

namespace ccadet {

/// Large-system limit of the first canonical correlation for a cell-edge user
/// received with equal SNR γe at both BSs: ρmax = γe/(γe + 1).
double theoretical_rho_max(double gamma_e);

/// Per-user operating SNRs: γe at both BSs for an edge user, (γp at the
/// serving BS, γf at the other) for a centre user. Non-negative.
struct SnrTriple {
  double gamma_e = 0.0;
  double gamma_p = 0.0;
  double gamma_f = 0.0;
};

/// Predicted squared-correlation matrix F of the two-view analysis. Users are
/// ordered [k_e edge, k_center_1 cell-1 centres, rest cell-2 centres]. With
/// identity Grams (the large-M operating point) F is diagonal: (γe/(γe+1))²
/// for edge users and γf·γp/((γf+1)(γp+1)) for centre users. Passing the real
/// symmetric Gram inverses Re((HℓᴴHℓ)⁻¹) evaluates the finite-M form
/// F = (Γ1 + G1)⁻¹·Γ12·(Γ2 + G2)⁻¹·Γ12 with Γ12 = (Γ2·Γ1)^½.
RealMatrix build_f_matrix(const std::vector<SnrTriple>& snrs, int k_e,
                          int k_center_1,
                          const std::optional<RealMatrix>& gram1_inv = std::nullopt,
                          const std::optional<RealMatrix>& gram2_inv = std::nullopt);

/// Principal angles (radians, ascending) between the column spans of a and b
/// (equal column counts, full column rank).
RealVector principal_angles(const RealMatrix& a, const RealMatrix& b);

/// Synthetic two-cell model of the large-system analysis: i.i.d. CN(0, 1/m)
/// channels, k_e edge users at SNR gamma_e on both links, centre users at
/// (gamma_p, gamma_f), complex noise variance sigma2 (0 gives the noiseless
/// limit). The γ values are per-real-dimension SNRs of the realified
/// pipeline — a ±1 source spans one real direction against sigma2/2 noise
/// per real part — which is the convention under which ρmax = γe/(γe + 1).
/// Requires m > k1 + k2 (the analysis' dimensionality condition).
struct AppendixScenario {
  int m = 64;
  int k1 = 2;
  int k2 = 2;
  int k_e = 1;  ///< nominally served by cell 1; k_e < k1
  double gamma_e = 1.0;
  double gamma_p = 100.0;
  double gamma_f = 0.01;
  int t = 4000;
  double sigma2 = 1.0;

  void validate() const;
};

/// Monte Carlo check of the ρmax prediction: draws the synthetic model,
/// projects each realified view onto its (k1 + k2)-dimensional principal
/// subspace (the prediction describes the signal subspace; raw 2m-dimensional
/// sample CCA would add an O(√(m/t)) spurious-correlation bias), runs the CCA
/// pipeline there, and reports how close the observed correlations and
/// common-subspace angles come to theory.
struct RhoTheoryReport {
  double gamma_e = 0.0;
  double theoretical_rho = 0.0;
  int trials = 0;
  double mean_abs_rho_error = 0.0;
  double median_abs_rho_error = 0.0;
  double median_max_angle_rad = 0.0;
  std::vector<double> rho1_samples;
};

RhoTheoryReport empirical_rho_vs_theory(const AppendixScenario& sc, int trials,
                                        Rng& rng);

}  // namespace ccadet

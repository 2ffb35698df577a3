#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ccadet/cca.hpp"
#include "ccadet/racma.hpp"
#include "ccadet/signal.hpp"
#include "ccadet/types.hpp"

namespace ccadet {

enum class DetectorId { cca_racma, zf_sic, ml_sic };

const char* detector_name(DetectorId id);
DetectorId detector_from_name(const std::string& name);

/// Output of an edge-user detector: T×k_e ±1 decisions plus diagnostics.
struct EdgeDetection {
  SymbolBlock symbols;        ///< all columns common
  RealVector rho;             ///< canonical correlations (CCA path; empty otherwise)
  double racma_residual = 0.0;
  bool oracle_selected = false;  ///< true for truth-assisted best-of variants
};

/// Blind cell-edge detection (Algorithm 1): sample correlations of the two
/// realified views, CCA at order k_e, per-view projections G1, G2 (T×k_e),
/// RACMA on the stacked [G1; G2], then one joint per-symbol decision over
/// both views using the estimated mixing (least-squares enumeration of the
/// 2^k_e sign vectors per time sample). ridge = nullopt uses default_ridge.
EdgeDetection detect_cca_racma(const ViewMatrix& y1, const ViewMatrix& y2,
                               int k_e,
                               std::optional<double> ridge = std::nullopt);

/// Classical zero-forcing with known channels: Ŝ = sign(Re(H⁺·Y))ᵀ (T×K).
/// Throws NumericalError when h_known is (numerically) rank deficient.
SymbolBlock zf_detect(const ReceivedBlock& y, const ComplexMatrix& h_known);

/// Per-BS successive interference cancellation of the (perfectly known) own
/// cell-centre users — one pass in decreasing received-power order, ZF
/// decision, re-encode and subtract — followed by blind RACMA on the edge
/// residual: both realified residual blocks are stacked antenna-wise, the
/// rank-k_e subspace is extracted by SVD and factorized once (the paper's
/// "double measurements" variant; this joint estimate is what the harness
/// reports).
EdgeDetection zf_sic_edge_detect(const ReceivedBlock& y1, const ReceivedBlock& y2,
                                 const ComplexMatrix& h_center_1,
                                 const ComplexMatrix& h_center_2, int k_e);

/// Same cancellation stage but with per-time-sample maximum-likelihood
/// enumeration of the own-cell centre symbols (2^k_center hypotheses).
/// Refuses scenarios with more than max_enum_users centre users per cell.
EdgeDetection ml_sic_edge_detect(const ReceivedBlock& y1, const ReceivedBlock& y2,
                                 const ComplexMatrix& h_center_1,
                                 const ComplexMatrix& h_center_2, int k_e,
                                 int max_enum_users = 4);

/// All ZF-SIC variants for debug output: joint (reported), plus the two
/// single-BS estimates whose best-of pick would need the ground truth.
struct SicVariants {
  EdgeDetection joint;
  std::array<EdgeDetection, 2> per_bs;
};

SicVariants zf_sic_edge_detect_variants(const ReceivedBlock& y1,
                                        const ReceivedBlock& y2,
                                        const ComplexMatrix& h_center_1,
                                        const ComplexMatrix& h_center_2, int k_e);

/// Bit errors of a ±1 estimate against the truth after signed-permutation
/// alignment (BER is invariant to the inherent ambiguity). bits_total =
/// rows×cols; per_user_errors is per aligned column.
struct DetectionRecord {
  DetectorId detector = DetectorId::cca_racma;
  long long bit_errors = 0;
  long long bits_total = 0;
  std::vector<long long> per_user_errors;
  double rho1 = 0.0;     ///< first canonical correlation when applicable
  double seconds = 0.0;  ///< detector run time (harness diagnostic)

  double ber() const {
    return bits_total == 0 ? 0.0 : static_cast<double>(bit_errors) / static_cast<double>(bits_total);
  }
};

DetectionRecord bit_error_rate(const RealMatrix& estimate, const RealMatrix& truth);

}  // namespace ccadet

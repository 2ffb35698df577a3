#pragma once

#include <optional>

#include "ccadet/cca.hpp"
#include "ccadet/channel.hpp"
#include "ccadet/types.hpp"

namespace ccadet {

/// T×K block of BPSK symbols (entries exactly ±1). Columns are partitioned
/// [common | private to cell 1 | private to cell 2]; the common block holds
/// the cell-edge users, matching the UserDrop column order.
struct SymbolBlock {
  RealMatrix s;
  int k_common = 0;
  int k_private1 = 0;
  int k_private2 = 0;

  Eigen::Index t() const { return s.rows(); }
  Eigen::Index k() const { return s.cols(); }
  /// Leading common (cell-edge) columns.
  RealMatrix common() const { return s.leftCols(k_common); }
};

/// i.i.d. equiprobable ±1 symbols, all columns marked common.
SymbolBlock generate_symbols(int t, int k, Rng& rng);

/// Frame with the scenario's column partition (k_e | centres 1 | centres 2).
SymbolBlock generate_frame(int t, const UserCounts& counts, Rng& rng);

/// Complex receive block of one BS: M×T samples plus the noise variance that
/// was applied.
struct ReceivedBlock {
  ComplexMatrix y;
  int bs_id = 1;                ///< 1 or 2
  double noise_variance = 0.0;  ///< per complex sample (σ²/2 per part)
};

/// Y = H·Sᵀ + W with W circularly-symmetric complex Gaussian of variance
/// sigma2 per entry. sigma2 = 0 gives the noiseless model. The standard-normal
/// noise draw is scaled by √sigma2, so a fixed rng stream yields the same
/// underlying realization at every SNR (paired comparisons).
ReceivedBlock synthesize_received(const ChannelRealization& chans,
                                  const SymbolBlock& frame, double sigma2,
                                  int bs_id, Rng& rng);

/// Noise variance for a target cell-edge SNR: σ² = P_e·10^(−snr_db/10), where
/// P_e is the mean of ‖h‖² over all cell-edge users and both BS links (unit
/// symbol power). Throws DimensionError when the realization has no edge user.
double calibrate_noise(double target_snr_db, const ChannelRealization& chans);

/// Real stacking [Re(Y); Im(Y)]: 2M×T view for the real-domain pipeline.
ViewMatrix complex_to_real_stack(const ReceivedBlock& y);

/// Inverse of complex_to_real_stack (rows must be even).
ComplexMatrix real_unstack(const RealMatrix& stacked);

/// Embeds the T-column block at column offset tau inside a block of
/// total_len columns. Without padding the surrounding columns are zero
/// (noiseless-padding test mode); with padding, its first tau columns go to
/// the left of the block and the rest to the right (continuation traffic).
/// Requires 0 ≤ tau and tau + T ≤ total_len.
ReceivedBlock apply_delay(const ReceivedBlock& y, int tau, int total_len,
                          const std::optional<ComplexMatrix>& padding = std::nullopt);

/// Slices columns [tau, tau + t_block) out of a longer block.
ReceivedBlock extract_block(const ReceivedBlock& y, int tau, int t_block);

}  // namespace ccadet

#pragma once

#include <array>
#include <string>
#include <vector>

#include "ccadet/types.hpp"

namespace ccadet {

/// Coefficients of the TR 38.901 urban-macro (UMa) link model used here.
/// Values mirror the shipped constants file (data/tr38901_uma.txt); see that
/// file for the clause references. Loading a file with the same values is the
/// schema round-trip exercised by tests.
struct UmaConstants {
  // Clause 7.4.2 (LOS probability, outdoor UMa, h_UT <= 23 m).
  double los_d0_m = 18.0;    ///< distance below which P_LOS = 1
  double los_decay_m = 63.0; ///< exponential decay constant

  // Clause 7.4.1 Table 7.4.1-1 (UMa path loss, fc in GHz, distances in m).
  double los_const_db = 28.0;
  double los_slope1 = 22.0;   ///< 10·n before the breakpoint
  double los_slope2 = 40.0;   ///< 10·n after the breakpoint
  double los_fc_slope = 20.0;
  double los_bp_corr = 9.0;   ///< breakpoint correction factor
  double nlos_const_db = 13.54;
  double nlos_slope = 39.08;
  double nlos_fc_slope = 20.0;
  double nlos_hut_slope = 0.6;
  double nlos_hut_ref_m = 1.5;

  // Default geometry heights and validity limits (same table).
  double h_bs_m = 25.0;
  double h_ut_m = 1.5;
  double h_e_m = 1.0;        ///< effective environment height (h_UT <= 13 m)
  double d2d_min_m = 10.0;
  double d2d_max_m = 5000.0;

  static UmaConstants defaults() { return UmaConstants{}; }
};

/// Parses a `key value` constants file (# comments, blank lines allowed).
/// Unknown keys and missing values raise ConfigError.
UmaConstants load_uma_constants(const std::string& path);

/// Outdoor UMa line-of-sight probability at 2-D distance d2d_m (metres).
/// Equals 1 below los_d0_m, decays smoothly, and is monotone non-increasing.
/// Negative distances raise DimensionError.
double los_probability(double d2d_m, const UmaConstants& c = UmaConstants::defaults());

/// Linear UMa path gain 10^(−PL/10) at 3-D distance d3d_m for carrier fc_ghz.
/// NLOS applies the usual max(PL_LOS, PL'_NLOS). Distances outside the model's
/// validity range are clamped to it and flagged.
struct PathGain {
  double gain = 0.0;
  bool clamped = false;
};

PathGain uma_path_gain(double d3d_m, double fc_ghz, bool los,
                       const UmaConstants& c = UmaConstants::defaults());

/// Uniform linear array response for azimuth theta at half-wavelength
/// spacing: entry n = exp(i·π·n·cos θ), n = 0..m−1. Unit-modulus entries.
ComplexVector array_response(double theta, int m);

/// Default extra attenuation (dB) on a centre user's link to the non-serving
/// BS, beyond UMa path loss. The detectors operate in a near-far regime where
/// centre users are effectively private to their serving site; raw UMa
/// distance ratios alone leave the cross links only ~9 dB below the edge
/// links, which is outside that regime. Set 0 for unmodified UMa gains.
inline constexpr double kCenterIsolationDb = 15.0;

/// Two-cell layout: BS 1 at the origin, BS 2 at (√3·R, 0) (adjacent hexagon
/// centres). Cell-centre users live in a disc of radius z·R around their BS;
/// cell-edge users live in the annular band edge_band·R restricted to the
/// half-plane on the shared-edge side (toward-coordinate ≥ apothem √3·R/2).
struct Geometry {
  double cell_radius_m = 500.0;
  double center_spread_z = 0.3;
  std::array<double, 2> edge_band{0.95, 1.05};
  double center_isolation_db = kCenterIsolationDb;

  std::array<Eigen::Vector2d, 2> bs_positions() const;
  double apothem_m() const { return cell_radius_m * std::sqrt(3.0) / 2.0; }
  void validate() const;  ///< throws ConfigError on impossible parameters
};

/// Per-cell user counts. k_edge[ℓ] of the k_users[ℓ] users served by BS ℓ+1
/// are cell-edge users (common to both views); the rest are cell-centre.
struct UserCounts {
  std::array<int, 2> k_users{8, 8};
  std::array<int, 2> k_edge{1, 1};

  int k_total() const { return k_users[0] + k_users[1]; }
  int k_e() const { return k_edge[0] + k_edge[1]; }
  int k_center(int cell) const { return k_users[cell] - k_edge[cell]; }
  void validate() const;
};

enum class UserRole { edge, center };

/// One random drop. Users are globally ordered [edge of cell 1, edge of cell
/// 2, centre of cell 1, centre of cell 2]; every channel/symbol matrix in the
/// pipeline uses this column order.
struct UserDrop {
  UserCounts counts;
  std::vector<Eigen::Vector2d> positions;  ///< k_total() entries
  std::vector<UserRole> roles;
  std::vector<int> serving_bs;             ///< 0-based cell index
};

UserDrop drop_users(const Geometry& geom, const UserCounts& counts, Rng& rng);

/// Channels of one drop. h_bs[ℓ] is M_ℓ × k_total with the drop's column
/// order; alpha[ℓ] and los[ℓ] hold the per-link large-scale gain and LOS flag.
/// E‖h‖² equals alpha by construction (equal power split over l_paths with
/// i.i.d. unit complex-Gaussian per-path phasors, 1/√M element scaling).
struct ChannelRealization {
  UserCounts counts;
  std::array<ComplexMatrix, 2> h_bs;
  std::array<RealVector, 2> alpha;
  std::array<std::vector<bool>, 2> los;
  bool distance_clamped = false;  ///< any link outside the UMa validity range

  /// Column of user `user` seen at BS `bs` (0-based).
  ComplexVector h(int bs, int user) const { return h_bs[bs].col(user); }
  /// M_ℓ × k_e block of cell-edge (common) users.
  ComplexMatrix h_common(int bs) const;
  /// M_ℓ × k_center(cell) block of the centre users served by `cell`.
  ComplexMatrix h_center(int bs, int cell) const;
};

ChannelRealization draw_channel(const UserDrop& drop, const Geometry& geom,
                                std::array<int, 2> m_antennas, int l_paths,
                                double fc_ghz, double tx_power_dbm, Rng& rng,
                                const UmaConstants& c = UmaConstants::defaults());

}  // namespace ccadet

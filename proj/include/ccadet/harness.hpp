#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccadet/channel.hpp"
#include "ccadet/detectors.hpp"
#include "ccadet/signal.hpp"
#include "ccadet/sync.hpp"
#include "ccadet/types.hpp"

namespace ccadet {

/// Frame-synchronization add-on of a scenario: record length and the offset
/// search window (inclusive).
struct SyncConfig {
  int t_tilde = 830;
  std::array<int, 2> window{0, 30};
};

/// One Monte Carlo experiment. Field names double as the scenario-file keys;
/// see presets/ for the file format (one `key = value` per line, # comments,
/// comma-separated pairs/lists). Unknown keys are rejected.
struct Scenario {
  std::string scenario_id = "scenario";
  double cell_radius_m = 500.0;
  std::array<int, 2> m_antennas{10, 10};
  std::array<int, 2> k_users{8, 8};
  std::array<int, 2> k_edge{1, 1};
  double center_spread_z = 0.3;
  std::array<double, 2> edge_band{0.95, 1.05};
  double center_isolation_db = kCenterIsolationDb;
  double tx_power_dbm = 25.0;
  int t_symbols = 800;
  std::vector<double> snr_grid_db{0, 2, 4, 6, 8, 10};
  int trials = 1000;
  double carrier_ghz = 2.0;
  int l_paths = 8;
  std::uint64_t seed = 1;
  std::vector<DetectorId> detectors{DetectorId::cca_racma, DetectorId::zf_sic};
  int max_enum_users = 4;
  std::optional<SyncConfig> sync;

  Geometry geometry() const;
  UserCounts counts() const;
  void validate() const;  ///< throws ConfigError naming the violated constraint
};

/// Parses a scenario file / stream. An empty file yields all defaults.
/// scenario_id defaults to the file stem when loaded from a path.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(std::istream& in, const std::string& default_id = "scenario");

/// Applies one `key=value` override with the same validation as the parser.
/// A rejected override throws ConfigError and leaves the scenario unchanged.
void apply_override(Scenario& sc, const std::string& key_equals_value);

/// One CSV row: aggregate over `trials` of one (snr, detector) cell.
struct ResultRow {
  std::string scenario_id;
  double snr_db = 0.0;
  DetectorId detector = DetectorId::cca_racma;
  long long trials = 0;
  long long bit_errors = 0;
  long long bits_total = 0;
  double ber = 0.0;
  double mean_rho1 = 0.0;
  double wall_time_s = 0.0;
  long long failed_trials = 0;  ///< debug column; not in the default CSV
};

/// One trial: a fresh drop/channel/frame/noise realization from the
/// (seed, trial_index) stream, shared by every enabled detector (paired
/// randomness). Returns one record per enabled detector, in scenario order.
std::vector<DetectionRecord> run_trial(const Scenario& sc, double snr_db,
                                       std::uint64_t trial_index);

/// run_trial plus an FNV-1a hash of the realized receive blocks (verifies the
/// paired design in debug output) and named side records such as the per-BS
/// ZF-SIC variants.
struct TrialDetail {
  std::vector<DetectionRecord> records;
  std::vector<std::pair<std::string, DetectionRecord>> debug_records;
  std::uint64_t realization_hash = 0;
};

TrialDetail run_trial_detailed(const Scenario& sc, double snr_db,
                               std::uint64_t trial_index);

/// Full grid: every (snr, trial) cell once, aggregated per (snr, detector).
/// Trials may run on n_threads workers; per-trial results are reduced in
/// trial order, so output is identical for any thread count. Wall time is
/// measured only when measure_timing is set (the default keeps rows
/// bit-reproducible). Trials that throw are counted in failed_trials and
/// reported on stderr; the row aggregates the successes.
std::vector<ResultRow> run_experiment(const Scenario& sc, int n_threads = 1,
                                      bool measure_timing = false);

/// Writes rows as CSV with the exact header
/// scenario_id,snr_db,detector,trials,bit_errors,bits_total,ber,mean_rho1,wall_time_s
/// (LF line endings, ber printed to round-trip precision). debug_columns
/// appends a failed_trials column after the standard nine.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path,
              bool debug_columns = false);
std::string csv_string(const std::vector<ResultRow>& rows, bool debug_columns = false);

/// Per-detector (snr, ber) series in a gnuplot-friendly block format.
void emit_plotdata(const std::vector<ResultRow>& rows, const std::string& path);

/// One synchronization trial: a frame embedded in two T̃-column recordings of
/// the same user streams (continuation traffic around the frame, independent
/// noise per BS). The frame sits at offset 0 in view 1 and at true_delay —
/// drawn uniformly from the scenario's window — in view 2.
struct SyncPair {
  ViewMatrix y1_long;
  ViewMatrix y2_long;
  int true_delay = 0;
  RealMatrix truth_common;  ///< T×k_e frame symbols of the edge users
  double gamma_e = 0.0;     ///< realized mean edge SNR (linear)
};

SyncPair make_sync_pair(const Scenario& sc, double snr_db,
                        std::uint64_t trial_index);

}  // namespace ccadet

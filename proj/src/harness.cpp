#include "ccadet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace ccadet {

Geometry Scenario::geometry() const {
  Geometry g;
  g.cell_radius_m = cell_radius_m;
  g.center_spread_z = center_spread_z;
  g.edge_band = edge_band;
  g.center_isolation_db = center_isolation_db;
  return g;
}

UserCounts Scenario::counts() const {
  UserCounts c;
  c.k_users = k_users;
  c.k_edge = k_edge;
  return c;
}

void Scenario::validate() const {
  if (scenario_id.empty() ||
      scenario_id.find_first_of(",\r\n") != std::string::npos) {
    throw ConfigError("scenario: scenario_id must be non-empty and free of commas/newlines");
  }
  geometry().validate();
  counts().validate();
  if (m_antennas[0] < 1 || m_antennas[1] < 1) {
    throw ConfigError("scenario: m_antennas entries must be positive");
  }
  if (t_symbols < 2) {
    throw ConfigError("scenario: t_symbols must be at least 2");
  }
  if (trials < 1) {
    throw ConfigError("scenario: trials must be positive");
  }
  if (l_paths < 1) {
    throw ConfigError("scenario: l_paths must be positive");
  }
  if (carrier_ghz <= 0.0) {
    throw ConfigError("scenario: carrier_ghz must be positive");
  }
  if (tx_power_dbm < -100.0 || tx_power_dbm > 100.0) {
    throw ConfigError("scenario: tx_power_dbm outside a sane range");
  }
  if (snr_grid_db.empty()) {
    throw ConfigError("scenario: snr_grid_db must contain at least one point");
  }
  if (detectors.empty()) {
    throw ConfigError("scenario: detectors must name at least one detector");
  }
  if (max_enum_users < 0) {
    throw ConfigError("scenario: max_enum_users must be non-negative");
  }
  const int k_e = counts().k_e();
  if (k_e < 1) {
    throw ConfigError("scenario: at least one cell-edge user is required");
  }
  const int view_dim = 2 * std::min(m_antennas[0], m_antennas[1]);
  if (k_e > view_dim) {
    std::ostringstream os;
    os << "scenario: k_e = " << k_e << " exceeds the smallest view dimension " << view_dim;
    throw ConfigError(os.str());
  }
  if (2 * t_symbols < racma_min_rows(k_e)) {
    std::ostringstream os;
    os << "scenario: t_symbols = " << t_symbols << " is below the separation floor for k_e = "
       << k_e;
    throw ConfigError(os.str());
  }
  if (sync) {
    if (sync->t_tilde < t_symbols) {
      throw ConfigError("scenario: sync_t_tilde must be at least t_symbols");
    }
    if (sync->window[0] < 0 || sync->window[0] > sync->window[1] ||
        sync->window[1] > sync->t_tilde - t_symbols) {
      std::ostringstream os;
      os << "scenario: sync_window must lie inside [0, " << sync->t_tilde - t_symbols << "]";
      throw ConfigError(os.str());
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    out.push_back(trim(item));
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("scenario: value of '" + key + "' is not a number: '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("scenario: trailing junk after value of '" + key + "': '" + value + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("scenario: value of '" + key + "' is not an integer: '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("scenario: trailing junk after value of '" + key + "': '" + value + "'");
  }
  return out;
}

/// A pair key accepts "a,b" or a single value applied to both entries.
template <typename T, typename Parse>
std::array<T, 2> to_pair(const std::string& key, const std::string& value, Parse parse) {
  const std::vector<std::string> items = split_list(value);
  if (items.size() == 1) {
    const T v = static_cast<T>(parse(key, items[0]));
    return {v, v};
  }
  if (items.size() == 2) {
    return {static_cast<T>(parse(key, items[0])), static_cast<T>(parse(key, items[1]))};
  }
  throw ConfigError("scenario: '" + key + "' expects one or two comma-separated values");
}

void set_key(Scenario& sc, const std::string& key, const std::string& value) {
  if (key == "scenario_id") {
    sc.scenario_id = value;
  } else if (key == "cell_radius_m") {
    sc.cell_radius_m = to_double(key, value);
  } else if (key == "m_antennas") {
    sc.m_antennas = to_pair<int>(key, value, to_int);
  } else if (key == "k_users") {
    sc.k_users = to_pair<int>(key, value, to_int);
  } else if (key == "k_edge") {
    sc.k_edge = to_pair<int>(key, value, to_int);
  } else if (key == "center_spread_z") {
    sc.center_spread_z = to_double(key, value);
  } else if (key == "edge_band") {
    sc.edge_band = to_pair<double>(key, value, to_double);
  } else if (key == "center_isolation_db") {
    sc.center_isolation_db = to_double(key, value);
  } else if (key == "tx_power_dbm") {
    sc.tx_power_dbm = to_double(key, value);
  } else if (key == "t_symbols") {
    sc.t_symbols = static_cast<int>(to_int(key, value));
  } else if (key == "snr_grid_db") {
    sc.snr_grid_db.clear();
    for (const std::string& item : split_list(value)) {
      sc.snr_grid_db.push_back(to_double(key, item));
    }
  } else if (key == "trials") {
    sc.trials = static_cast<int>(to_int(key, value));
  } else if (key == "carrier_ghz") {
    sc.carrier_ghz = to_double(key, value);
  } else if (key == "l_paths") {
    sc.l_paths = static_cast<int>(to_int(key, value));
  } else if (key == "seed") {
    sc.seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "detectors") {
    sc.detectors.clear();
    for (const std::string& item : split_list(value)) {
      sc.detectors.push_back(detector_from_name(item));
    }
  } else if (key == "max_enum_users") {
    sc.max_enum_users = static_cast<int>(to_int(key, value));
  } else if (key == "sync_t_tilde") {
    if (!sc.sync) sc.sync = SyncConfig{};
    sc.sync->t_tilde = static_cast<int>(to_int(key, value));
  } else if (key == "sync_window") {
    if (!sc.sync) sc.sync = SyncConfig{};
    sc.sync->window = to_pair<int>(key, value, to_int);
  } else {
    throw ConfigError("scenario: unknown key '" + key + "'");
  }
}

std::string file_stem(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name.erase(dot);
  return name.empty() ? "scenario" : name;
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& default_id) {
  Scenario sc;
  sc.scenario_id = default_id;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "scenario: line " << lineno << " is not a 'key = value' pair: '" << body << "'";
      throw ConfigError(os.str());
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream os;
      os << "scenario: line " << lineno << " has an empty key or value";
      throw ConfigError(os.str());
    }
    set_key(sc, key, value);
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("scenario: cannot open " + path);
  }
  return parse_scenario(in, file_stem(path));
}

void apply_override(Scenario& sc, const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value, got '" + key_equals_value + "'");
  }
  const std::string key = trim(key_equals_value.substr(0, eq));
  const std::string value = trim(key_equals_value.substr(eq + 1));
  if (key.empty() || value.empty()) {
    throw ConfigError("override must be key=value, got '" + key_equals_value + "'");
  }
  // Validate on a copy so a rejected override leaves the scenario untouched.
  Scenario updated = sc;
  set_key(updated, key, value);
  updated.validate();
  sc = std::move(updated);
}

namespace {

struct Realization {
  ChannelRealization chans;
  SymbolBlock frame;
  ReceivedBlock y1;
  ReceivedBlock y2;
  double sigma2 = 0.0;
};

Realization make_realization(const Scenario& sc, double snr_db, std::uint64_t trial_index) {
  Rng rng = make_trial_rng(sc.seed, trial_index);
  Realization r;
  const Geometry geom = sc.geometry();
  const UserDrop drop = drop_users(geom, sc.counts(), rng);
  r.chans = draw_channel(drop, geom, sc.m_antennas, sc.l_paths, sc.carrier_ghz,
                         sc.tx_power_dbm, rng);
  r.frame = generate_frame(sc.t_symbols, sc.counts(), rng);
  r.sigma2 = calibrate_noise(snr_db, r.chans);
  r.y1 = synthesize_received(r.chans, r.frame, r.sigma2, 1, rng);
  r.y2 = synthesize_received(r.chans, r.frame, r.sigma2, 2, rng);
  return r;
}

DetectionRecord score(const EdgeDetection& det, const RealMatrix& truth, DetectorId id,
                      double seconds) {
  DetectionRecord rec = bit_error_rate(det.symbols.s, truth);
  rec.detector = id;
  rec.rho1 = det.rho.size() > 0 ? det.rho[0] : 0.0;
  rec.seconds = seconds;
  return rec;
}

DetectionRecord run_one_detector(const Scenario& sc, const Realization& r, DetectorId id) {
  const int k_e = sc.counts().k_e();
  const auto start = std::chrono::steady_clock::now();
  EdgeDetection det;
  switch (id) {
    case DetectorId::cca_racma:
      det = detect_cca_racma(complex_to_real_stack(r.y1), complex_to_real_stack(r.y2), k_e);
      break;
    case DetectorId::zf_sic:
      det = zf_sic_edge_detect(r.y1, r.y2, r.chans.h_center(0, 0), r.chans.h_center(1, 1), k_e);
      break;
    case DetectorId::ml_sic:
      det = ml_sic_edge_detect(r.y1, r.y2, r.chans.h_center(0, 0), r.chans.h_center(1, 1), k_e,
                               sc.max_enum_users);
      break;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return score(det, r.frame.common(), id, elapsed.count());
}

std::uint64_t fnv1a(const double* data, std::size_t n, std::uint64_t h) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_block(const ComplexMatrix& y, std::uint64_t h) {
  const RealMatrix re = y.real();
  const RealMatrix im = y.imag();
  h = fnv1a(re.data(), static_cast<std::size_t>(re.size()), h);
  return fnv1a(im.data(), static_cast<std::size_t>(im.size()), h);
}

}  // namespace

std::vector<DetectionRecord> run_trial(const Scenario& sc, double snr_db,
                                       std::uint64_t trial_index) {
  const Realization r = make_realization(sc, snr_db, trial_index);
  std::vector<DetectionRecord> records;
  records.reserve(sc.detectors.size());
  for (DetectorId id : sc.detectors) {
    records.push_back(run_one_detector(sc, r, id));
  }
  return records;
}

TrialDetail run_trial_detailed(const Scenario& sc, double snr_db, std::uint64_t trial_index) {
  const Realization r = make_realization(sc, snr_db, trial_index);
  TrialDetail out;
  out.realization_hash = hash_block(r.y2.y, hash_block(r.y1.y, 1469598103934665603ULL));
  const RealMatrix truth = r.frame.common();
  const int k_e = sc.counts().k_e();
  for (DetectorId id : sc.detectors) {
    out.records.push_back(run_one_detector(sc, r, id));
    if (id == DetectorId::zf_sic) {
      const SicVariants var = zf_sic_edge_detect_variants(
          r.y1, r.y2, r.chans.h_center(0, 0), r.chans.h_center(1, 1), k_e);
      DetectionRecord bs1 = score(var.per_bs[0], truth, DetectorId::zf_sic, 0.0);
      DetectionRecord bs2 = score(var.per_bs[1], truth, DetectorId::zf_sic, 0.0);
      out.debug_records.emplace_back("zf_sic_bs1", bs1);
      out.debug_records.emplace_back("zf_sic_bs2", bs2);
      // Picking the better single-BS run needs the truth: oracle-selected.
      out.debug_records.emplace_back("zf_sic_best_oracle",
                                     bs1.bit_errors <= bs2.bit_errors ? bs1 : bs2);
    }
  }
  return out;
}

std::vector<ResultRow> run_experiment(const Scenario& sc, int n_threads, bool measure_timing) {
  sc.validate();
  const int n_det = static_cast<int>(sc.detectors.size());
  std::vector<ResultRow> rows;
  rows.reserve(sc.snr_grid_db.size() * static_cast<std::size_t>(n_det));

  for (double snr_db : sc.snr_grid_db) {
    const int trials = sc.trials;
    std::vector<std::vector<DetectionRecord>> results(static_cast<std::size_t>(trials));
    std::vector<std::string> failures(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};

    auto worker = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= trials) return;
        try {
          results[static_cast<std::size_t>(i)] =
              run_trial(sc, snr_db, static_cast<std::uint64_t>(i));
        } catch (const std::exception& e) {
          failures[static_cast<std::size_t>(i)] = e.what();
        }
      }
    };

    const int workers = std::max(1, std::min(n_threads, trials));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (std::thread& th : pool) th.join();
    }

    // Deterministic reduction in trial order, independent of worker count.
    std::vector<ResultRow> agg(static_cast<std::size_t>(n_det));
    for (int d = 0; d < n_det; ++d) {
      ResultRow& row = agg[static_cast<std::size_t>(d)];
      row.scenario_id = sc.scenario_id;
      row.snr_db = snr_db;
      row.detector = sc.detectors[static_cast<std::size_t>(d)];
    }
    std::vector<double> rho_sums(static_cast<std::size_t>(n_det), 0.0);
    std::vector<double> sec_sums(static_cast<std::size_t>(n_det), 0.0);
    long long failed = 0;
    for (int i = 0; i < trials; ++i) {
      if (!failures[static_cast<std::size_t>(i)].empty()) {
        ++failed;
        std::cerr << "trial " << i << " at " << snr_db << " dB failed: "
                  << failures[static_cast<std::size_t>(i)] << "\n";
        continue;
      }
      const auto& recs = results[static_cast<std::size_t>(i)];
      for (int d = 0; d < n_det; ++d) {
        const DetectionRecord& rec = recs[static_cast<std::size_t>(d)];
        ResultRow& row = agg[static_cast<std::size_t>(d)];
        row.trials += 1;
        row.bit_errors += rec.bit_errors;
        row.bits_total += rec.bits_total;
        rho_sums[static_cast<std::size_t>(d)] += rec.rho1;
        sec_sums[static_cast<std::size_t>(d)] += rec.seconds;
      }
    }
    for (int d = 0; d < n_det; ++d) {
      ResultRow& row = agg[static_cast<std::size_t>(d)];
      row.failed_trials = failed;
      row.ber = row.bits_total == 0
                    ? 0.0
                    : static_cast<double>(row.bit_errors) / static_cast<double>(row.bits_total);
      row.mean_rho1 =
          row.trials == 0 ? 0.0 : rho_sums[static_cast<std::size_t>(d)] / static_cast<double>(row.trials);
      row.wall_time_s = measure_timing ? sec_sums[static_cast<std::size_t>(d)] : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string csv_string(const std::vector<ResultRow>& rows, bool debug_columns) {
  std::ostringstream os;
  os << "scenario_id,snr_db,detector,trials,bit_errors,bits_total,ber,mean_rho1,wall_time_s";
  if (debug_columns) os << ",failed_trials";
  os << "\n";
  for (const ResultRow& row : rows) {
    os << row.scenario_id << ',' << fmt_double(row.snr_db) << ',' << detector_name(row.detector)
       << ',' << row.trials << ',' << row.bit_errors << ',' << row.bits_total << ','
       << fmt_double(row.ber) << ',' << fmt_double(row.mean_rho1) << ','
       << fmt_double(row.wall_time_s);
    if (debug_columns) os << ',' << row.failed_trials;
    os << "\n";
  }
  return os.str();
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path, bool debug_columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("emit_csv: cannot open " + path + " for writing");
  }
  out << csv_string(rows, debug_columns);
}

void emit_plotdata(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("emit_plotdata: cannot open " + path + " for writing");
  }
  // One block per detector (gnuplot `index` addressing), rows ordered by SNR.
  std::vector<DetectorId> seen;
  for (const ResultRow& row : rows) {
    if (std::find(seen.begin(), seen.end(), row.detector) == seen.end()) {
      seen.push_back(row.detector);
    }
  }
  bool first = true;
  for (DetectorId id : seen) {
    if (!first) out << "\n\n";
    first = false;
    out << "# " << detector_name(id) << "\n# snr_db ber\n";
    for (const ResultRow& row : rows) {
      if (row.detector == id) {
        out << fmt_double(row.snr_db) << ' ' << fmt_double(row.ber) << "\n";
      }
    }
  }
}

SyncPair make_sync_pair(const Scenario& sc, double snr_db, std::uint64_t trial_index) {
  if (!sc.sync) {
    throw ConfigError("make_sync_pair: scenario has no sync block (set sync_t_tilde)");
  }
  const SyncConfig& cfg = *sc.sync;
  Rng rng = make_trial_rng(sc.seed, trial_index);
  const Geometry geom = sc.geometry();
  const UserCounts counts = sc.counts();
  const UserDrop drop = drop_users(geom, counts, rng);
  const ChannelRealization chans = draw_channel(drop, geom, sc.m_antennas, sc.l_paths,
                                                sc.carrier_ghz, sc.tx_power_dbm, rng);

  std::uniform_int_distribution<int> delay_dist(cfg.window[0], cfg.window[1]);
  const int tau_d = delay_dist(rng);

  // One continuous symbol stream per user; each BS records t_tilde columns of
  // it with its own offset, so only the true alignment shares content.
  const int stream_len = tau_d + cfg.t_tilde;
  const SymbolBlock stream = generate_frame(stream_len, counts, rng);
  const double sigma2 = calibrate_noise(snr_db, chans);

  auto window_of = [&](int start, int bs) {
    SymbolBlock slice;
    slice.s = stream.s.middleRows(start, cfg.t_tilde);
    slice.k_common = stream.k_common;
    slice.k_private1 = stream.k_private1;
    slice.k_private2 = stream.k_private2;
    return synthesize_received(chans, slice, sigma2, bs, rng);
  };
  // View 1 starts at stream column tau_d (the frame sits at its offset 0);
  // view 2 starts at 0, so the frame appears at offset tau_d.
  const ReceivedBlock y1 = window_of(tau_d, 1);
  const ReceivedBlock y2 = window_of(0, 2);

  SyncPair pair;
  pair.y1_long = complex_to_real_stack(y1);
  pair.y2_long = complex_to_real_stack(y2);
  pair.true_delay = tau_d;
  pair.truth_common = stream.s.block(tau_d, 0, sc.t_symbols, counts.k_e());
  double p_e = 0.0;
  for (int b = 0; b < 2; ++b) {
    for (int u = 0; u < counts.k_e(); ++u) {
      p_e += chans.h_bs[b].col(u).squaredNorm();
    }
  }
  p_e /= static_cast<double>(2 * counts.k_e());
  pair.gamma_e = sigma2 > 0.0 ? p_e / sigma2 : 0.0;
  return pair;
}

}  // namespace ccadet

#include "ccadet/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ccadet {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPi = 3.14159265358979323846;

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("constants file: value of '" + key + "' is not a number: " + value);
  }
  if (pos != value.size()) {
    throw ConfigError("constants file: trailing junk after value of '" + key + "': " + value);
  }
  return out;
}

}  // namespace

UmaConstants load_uma_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("constants file: cannot open " + path);
  }
  UmaConstants c;
  std::map<std::string, double*> fields{
      {"los_d0_m", &c.los_d0_m},
      {"los_decay_m", &c.los_decay_m},
      {"los_const_db", &c.los_const_db},
      {"los_slope1", &c.los_slope1},
      {"los_slope2", &c.los_slope2},
      {"los_fc_slope", &c.los_fc_slope},
      {"los_bp_corr", &c.los_bp_corr},
      {"nlos_const_db", &c.nlos_const_db},
      {"nlos_slope", &c.nlos_slope},
      {"nlos_fc_slope", &c.nlos_fc_slope},
      {"nlos_hut_slope", &c.nlos_hut_slope},
      {"nlos_hut_ref_m", &c.nlos_hut_ref_m},
      {"h_bs_m", &c.h_bs_m},
      {"h_ut_m", &c.h_ut_m},
      {"h_e_m", &c.h_e_m},
      {"d2d_min_m", &c.d2d_min_m},
      {"d2d_max_m", &c.d2d_max_m},
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;  // blank
    if (!(ls >> value)) {
      std::ostringstream os;
      os << "constants file: line " << lineno << ": key '" << key << "' has no value";
      throw ConfigError(os.str());
    }
    if (ls >> extra) {
      std::ostringstream os;
      os << "constants file: line " << lineno << ": unexpected token '" << extra << "'";
      throw ConfigError(os.str());
    }
    auto it = fields.find(key);
    if (it == fields.end()) {
      std::ostringstream os;
      os << "constants file: line " << lineno << ": unknown key '" << key << "'";
      throw ConfigError(os.str());
    }
    *it->second = parse_double(key, value);
  }
  return c;
}

double los_probability(double d2d_m, const UmaConstants& c) {
  if (d2d_m < 0.0) {
    throw DimensionError("los_probability: distance must be non-negative");
  }
  if (d2d_m <= c.los_d0_m) return 1.0;
  // Outdoor UMa, h_UT <= 13 m (the aerial correction term C'(h_UT) is zero).
  return c.los_d0_m / d2d_m +
         std::exp(-d2d_m / c.los_decay_m) * (1.0 - c.los_d0_m / d2d_m);
}

PathGain uma_path_gain(double d3d_m, double fc_ghz, bool los, const UmaConstants& c) {
  if (fc_ghz <= 0.0) {
    throw DimensionError("uma_path_gain: carrier frequency must be positive");
  }
  const double dh = c.h_bs_m - c.h_ut_m;
  double d2d = d3d_m * d3d_m > dh * dh ? std::sqrt(d3d_m * d3d_m - dh * dh) : 0.0;
  PathGain out;
  if (d2d < c.d2d_min_m) {
    d2d = c.d2d_min_m;
    out.clamped = true;
  } else if (d2d > c.d2d_max_m) {
    d2d = c.d2d_max_m;
    out.clamped = true;
  }
  const double d3d = std::sqrt(d2d * d2d + dh * dh);

  // Breakpoint distance with the effective environment height h_E (deterministic
  // for h_UT <= 13 m).
  const double d_bp = 4.0 * (c.h_bs_m - c.h_e_m) * (c.h_ut_m - c.h_e_m) *
                      (fc_ghz * 1e9) / kSpeedOfLight;
  double pl_los;
  if (d2d <= d_bp) {
    pl_los = c.los_const_db + c.los_slope1 * std::log10(d3d) + c.los_fc_slope * std::log10(fc_ghz);
  } else {
    pl_los = c.los_const_db + c.los_slope2 * std::log10(d3d) +
             c.los_fc_slope * std::log10(fc_ghz) -
             c.los_bp_corr * std::log10(d_bp * d_bp + dh * dh);
  }
  double pl = pl_los;
  if (!los) {
    const double pl_nlos = c.nlos_const_db + c.nlos_slope * std::log10(d3d) +
                           c.nlos_fc_slope * std::log10(fc_ghz) -
                           c.nlos_hut_slope * (c.h_ut_m - c.nlos_hut_ref_m);
    pl = std::max(pl_los, pl_nlos);
  }
  out.gain = std::pow(10.0, -pl / 10.0);
  return out;
}

ComplexVector array_response(double theta, int m) {
  if (m < 1) {
    throw DimensionError("array_response: antenna count must be positive");
  }
  ComplexVector a(m);
  const double phase_step = kPi * std::cos(theta);
  for (int n = 0; n < m; ++n) {
    a[n] = std::polar(1.0, phase_step * static_cast<double>(n));
  }
  return a;
}

std::array<Eigen::Vector2d, 2> Geometry::bs_positions() const {
  return {Eigen::Vector2d(0.0, 0.0),
          Eigen::Vector2d(std::sqrt(3.0) * cell_radius_m, 0.0)};
}

void Geometry::validate() const {
  if (cell_radius_m <= 0.0) {
    throw ConfigError("geometry: cell_radius_m must be positive");
  }
  if (!(center_spread_z > 0.0) || !(center_spread_z < 1.0)) {
    throw ConfigError("geometry: center_spread_z must lie in (0, 1)");
  }
  if (!(edge_band[0] > 0.0) || !(edge_band[0] < edge_band[1])) {
    throw ConfigError("geometry: edge_band must satisfy 0 < lower < upper");
  }
  if (edge_band[1] * cell_radius_m <= apothem_m()) {
    throw ConfigError("geometry: edge_band upper radius does not reach the shared edge "
                      "(needs edge_band[1] > sqrt(3)/2)");
  }
  if (!(center_isolation_db >= 0.0) || !std::isfinite(center_isolation_db)) {
    throw ConfigError("geometry: center_isolation_db must be finite and non-negative");
  }
}

void UserCounts::validate() const {
  for (int cell = 0; cell < 2; ++cell) {
    if (k_edge[cell] < 0) {
      std::ostringstream os;
      os << "user counts: cell " << cell + 1 << " has negative k_edge";
      throw ConfigError(os.str());
    }
    if (k_edge[cell] >= k_users[cell]) {
      std::ostringstream os;
      os << "user counts: cell " << cell + 1 << " needs k_edge < k_users, got k_edge "
         << k_edge[cell] << " with k_users " << k_users[cell];
      throw ConfigError(os.str());
    }
  }
}

UserDrop drop_users(const Geometry& geom, const UserCounts& counts, Rng& rng) {
  geom.validate();
  counts.validate();
  const auto bs = geom.bs_positions();
  const double r_cell = geom.cell_radius_m;
  const double apothem = geom.apothem_m();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);

  UserDrop drop;
  drop.counts = counts;
  const int total = counts.k_total();
  drop.positions.reserve(total);
  drop.roles.reserve(total);
  drop.serving_bs.reserve(total);

  // Area-uniform point in the [band]·R annulus around `center`, restricted to
  // the half-plane beyond the shared-edge line (rejection sampling; `toward`
  // is +1 for BS 1, −1 for BS 2).
  auto draw_edge = [&](const Eigen::Vector2d& center, double toward) {
    const double r_lo = geom.edge_band[0] * r_cell;
    const double r_hi = geom.edge_band[1] * r_cell;
    for (;;) {
      const double r = std::sqrt(r_lo * r_lo + unit(rng) * (r_hi * r_hi - r_lo * r_lo));
      const double th = angle(rng);
      const Eigen::Vector2d p = center + r * Eigen::Vector2d(std::cos(th), std::sin(th));
      if (toward * (p.x() - center.x()) >= apothem) return p;
    }
  };
  auto draw_center = [&](const Eigen::Vector2d& center) {
    const double r = geom.center_spread_z * r_cell * std::sqrt(unit(rng));
    const double th = angle(rng);
    return Eigen::Vector2d(center + r * Eigen::Vector2d(std::cos(th), std::sin(th)));
  };

  for (int cell = 0; cell < 2; ++cell) {
    const double toward = cell == 0 ? 1.0 : -1.0;
    for (int k = 0; k < counts.k_edge[cell]; ++k) {
      drop.positions.push_back(draw_edge(bs[cell], toward));
      drop.roles.push_back(UserRole::edge);
      drop.serving_bs.push_back(cell);
    }
  }
  for (int cell = 0; cell < 2; ++cell) {
    for (int k = 0; k < counts.k_center(cell); ++k) {
      drop.positions.push_back(draw_center(bs[cell]));
      drop.roles.push_back(UserRole::center);
      drop.serving_bs.push_back(cell);
    }
  }
  return drop;
}

ComplexMatrix ChannelRealization::h_common(int bs) const {
  return h_bs[bs].leftCols(counts.k_e());
}

ComplexMatrix ChannelRealization::h_center(int bs, int cell) const {
  const int offset = counts.k_e() + (cell == 0 ? 0 : counts.k_center(0));
  return h_bs[bs].middleCols(offset, counts.k_center(cell));
}

ChannelRealization draw_channel(const UserDrop& drop, const Geometry& geom,
                                std::array<int, 2> m_antennas, int l_paths,
                                double fc_ghz, double tx_power_dbm, Rng& rng,
                                const UmaConstants& c) {
  if (l_paths < 1) {
    throw ConfigError("draw_channel: l_paths must be positive");
  }
  if (m_antennas[0] < 1 || m_antennas[1] < 1) {
    throw ConfigError("draw_channel: antenna counts must be positive");
  }
  const auto bs = geom.bs_positions();
  const int total = drop.counts.k_total();
  const double tx_w = std::pow(10.0, (tx_power_dbm - 30.0) / 10.0);

  ChannelRealization out;
  out.counts = drop.counts;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int b = 0; b < 2; ++b) {
    const int m = m_antennas[b];
    out.h_bs[b] = ComplexMatrix::Zero(m, total);
    out.alpha[b] = RealVector::Zero(total);
    out.los[b].assign(total, false);
  }
  for (int b = 0; b < 2; ++b) {
    const int m = m_antennas[b];
    const double elem_scale = std::sqrt(1.0 / static_cast<double>(m));
    for (int u = 0; u < total; ++u) {
      const double d2d = (drop.positions[u] - bs[b]).norm();
      const double dh = c.h_bs_m - c.h_ut_m;
      const double d3d = std::sqrt(d2d * d2d + dh * dh);
      // Cell-edge users are NLOS on both links. A centre user draws one LOS
      // state for its serving link from the UMa probability; the inter-cell
      // link crosses the whole deployment and stays NLOS — a LOS interferer
      // at the other BS would be as common as the edge users themselves,
      // which is outside the near-far regime this model targets.
      bool los = false;
      if (drop.roles[u] == UserRole::center && drop.serving_bs[u] == b) {
        los = unit(rng) < los_probability(d2d, c);
      }
      const PathGain pg = uma_path_gain(d3d, fc_ghz, los, c);
      out.distance_clamped = out.distance_clamped || pg.clamped;
      double alpha = tx_w * pg.gain;
      // Centre users are private to their serving site in this model: their
      // inter-cell links carry the deployment's extra isolation on top of the
      // UMa loss. Edge users stay common — that is the structure exploited.
      if (drop.roles[u] == UserRole::center && drop.serving_bs[u] != b) {
        alpha *= std::pow(10.0, -geom.center_isolation_db / 10.0);
      }
      out.alpha[b][u] = alpha;
      out.los[b][u] = los;

      // Equal power split across paths; i.i.d. CN(0,1) per-path phasor keeps
      // E‖h‖² = alpha for any path count.
      const double path_amp = std::sqrt(alpha / static_cast<double>(l_paths));
      ComplexVector h = ComplexVector::Zero(m);
      for (int p = 0; p < l_paths; ++p) {
        const double theta = angle(rng);
        const Complex phasor(gauss(rng) / std::sqrt(2.0), gauss(rng) / std::sqrt(2.0));
        h += (path_amp * phasor) * array_response(theta, m);
      }
      out.h_bs[b].col(u) = elem_scale * h;
    }
  }
  return out;
}

}  // namespace ccadet

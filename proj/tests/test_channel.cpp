#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ccadet/channel.hpp"
#include "ccadet/types.hpp"
#include "doctest.h"

namespace {

using namespace ccadet;

constexpr double kPi = 3.14159265358979323846;

Geometry default_geometry() { return Geometry{}; }

/// Serving-link distance of user `u` in `drop` under `geom`.
double serving_distance(const UserDrop& drop, const Geometry& geom, int u) {
  const auto bs = geom.bs_positions();
  return (drop.positions[static_cast<std::size_t>(u)] -
          bs[static_cast<std::size_t>(drop.serving_bs[static_cast<std::size_t>(u)])])
      .norm();
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("los_probability follows the closed form and its limits") {
  CHECK(los_probability(0.0) == 1.0);
  CHECK(los_probability(18.0) == 1.0);
  CHECK(los_probability(10.0) == 1.0);

  // Hand evaluation at 100 m: 18/100 + exp(-100/63)·(1 − 18/100).
  const double expected = 18.0 / 100.0 + std::exp(-100.0 / 63.0) * (1.0 - 18.0 / 100.0);
  CHECK(los_probability(100.0) == doctest::Approx(expected).epsilon(1e-12));

  // Monotone non-increasing, in [0, 1], vanishing far out.
  double prev = 1.0;
  for (double d = 0.0; d <= 5000.0; d += 25.0) {
    const double p = los_probability(d);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p <= prev + 1e-12);
    prev = p;
  }
  CHECK(los_probability(1e5) < 1e-3);

  CHECK_THROWS_AS(los_probability(-1.0), DimensionError);
}

TEST_CASE("uma_path_gain reproduces the tabulated formulas") {
  const UmaConstants c = UmaConstants::defaults();
  const double dh = c.h_bs_m - c.h_ut_m;  // 23.5 m

  SUBCASE("LOS before the breakpoint") {
    // d_BP = 4·(25−1)·(1.5−1)·fc/c = 320 m at 2 GHz; d3d = 100 is inside.
    const double pl = 28.0 + 22.0 * std::log10(100.0) + 20.0 * std::log10(2.0);
    const PathGain g = uma_path_gain(100.0, 2.0, true);
    CHECK_FALSE(g.clamped);
    CHECK(g.gain == doctest::Approx(std::pow(10.0, -pl / 10.0)).epsilon(1e-12));
  }

  SUBCASE("LOS after the breakpoint") {
    const double d_bp = 4.0 * (c.h_bs_m - c.h_e_m) * (c.h_ut_m - c.h_e_m) * 2e9 / 299792458.0;
    const double d3d = 1000.0;
    const double pl = 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(2.0) -
                      9.0 * std::log10(d_bp * d_bp + dh * dh);
    const PathGain g = uma_path_gain(d3d, 2.0, true);
    CHECK_FALSE(g.clamped);
    CHECK(g.gain == doctest::Approx(std::pow(10.0, -pl / 10.0)).epsilon(1e-9));
  }

  SUBCASE("NLOS takes the max of the two losses") {
    const double d_bp = 4.0 * (c.h_bs_m - c.h_e_m) * (c.h_ut_m - c.h_e_m) * 2e9 / 299792458.0;
    const double d3d = 1000.0;
    const double pl_los = 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(2.0) -
                          9.0 * std::log10(d_bp * d_bp + dh * dh);
    const double pl_nlos = 13.54 + 39.08 * std::log10(d3d) + 20.0 * std::log10(2.0) -
                           0.6 * (c.h_ut_m - 1.5);
    const PathGain g = uma_path_gain(d3d, 2.0, false);
    CHECK(g.gain ==
          doctest::Approx(std::pow(10.0, -std::max(pl_los, pl_nlos) / 10.0)).epsilon(1e-9));
  }

  SUBCASE("doubling the distance applies the NLOS exponent") {
    const double g1 = uma_path_gain(500.0, 2.0, false).gain;
    const double g2 = uma_path_gain(1000.0, 2.0, false).gain;
    const double expected_ratio = std::pow(10.0, -39.08 * std::log10(2.0) / 10.0);
    CHECK(g2 / g1 == doctest::Approx(expected_ratio).epsilon(1e-9));
  }

  SUBCASE("gain decreases strictly with distance, LOS above NLOS") {
    double prev_los = 1.0;
    double prev_nlos = 1.0;
    for (double d = 30.0; d <= 5000.0; d += 35.0) {
      const double gl = uma_path_gain(d, 2.0, true).gain;
      const double gn = uma_path_gain(d, 2.0, false).gain;
      CHECK(gl < prev_los);
      CHECK(gn < prev_nlos);
      CHECK(gl >= gn);
      prev_los = gl;
      prev_nlos = gn;
    }
  }

  SUBCASE("distances outside the validity range are clamped and flagged") {
    const PathGain far1 = uma_path_gain(6000.0, 2.0, false);
    const PathGain far2 = uma_path_gain(1e5, 2.0, false);
    CHECK(far1.clamped);
    CHECK(far2.clamped);
    CHECK(far1.gain == far2.gain);  // both evaluate at the 5000 m cap

    const PathGain near1 = uma_path_gain(1.0, 2.0, true);
    const PathGain near2 = uma_path_gain(5.0, 2.0, true);
    CHECK(near1.clamped);
    CHECK(near2.clamped);
    CHECK(near1.gain == near2.gain);  // both evaluate at the 10 m floor

    CHECK_FALSE(uma_path_gain(100.0, 2.0, true).clamped);
  }

  CHECK_THROWS_AS(uma_path_gain(100.0, 0.0, true), DimensionError);
}

TEST_CASE("array_response hand checks") {
  SUBCASE("broadside gives the all-ones vector") {
    const ComplexVector a = array_response(kPi / 2.0, 5);
    for (int n = 0; n < 5; ++n) {
      CHECK(std::abs(a[n] - Complex(1.0, 0.0)) < 1e-12);
    }
  }
  SUBCASE("single antenna") {
    const ComplexVector a = array_response(0.7, 1);
    REQUIRE(a.size() == 1);
    CHECK(std::abs(a[0] - Complex(1.0, 0.0)) < 1e-12);
  }
  SUBCASE("endfire alternates sign") {
    const ComplexVector a = array_response(0.0, 4);
    const double expected[4] = {1.0, -1.0, 1.0, -1.0};
    for (int n = 0; n < 4; ++n) {
      CHECK(std::abs(a[n] - Complex(expected[n], 0.0)) < 1e-10);
    }
  }
  SUBCASE("unit modulus and the cos-theta symmetries") {
    for (double theta : {0.3, 1.1, 2.5, -0.8}) {
      const ComplexVector a = array_response(theta, 6);
      const ComplexVector mirrored = array_response(-theta, 6);          // cos is even
      const ComplexVector reflected = array_response(M_PI - theta, 6);   // cos flips sign
      for (int n = 0; n < 6; ++n) {
        CHECK(std::abs(std::abs(a[n]) - 1.0) < 1e-12);
        CHECK(std::abs(a[n] - mirrored[n]) < 1e-12);
        CHECK(std::abs(a[n] - std::conj(reflected[n])) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(array_response(0.1, 0), DimensionError);
}

TEST_CASE("geometry places the sites root-three radii apart") {
  const Geometry geom = default_geometry();
  const auto bs = geom.bs_positions();
  CHECK(bs[0].x() == 0.0);
  CHECK(bs[0].y() == 0.0);
  CHECK(bs[1].x() == doctest::Approx(std::sqrt(3.0) * 500.0).epsilon(1e-12));
  CHECK(bs[1].y() == 0.0);
  CHECK(geom.apothem_m() == doctest::Approx(500.0 * std::sqrt(3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("geometry validation rejects impossible parameters") {
  Geometry g = default_geometry();
  CHECK_NOTHROW(g.validate());

  Geometry bad = g;
  bad.cell_radius_m = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = g;
  bad.center_spread_z = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = g;
  bad.edge_band = {1.05, 0.95};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = g;
  bad.edge_band = {0.5, 0.8};  // upper radius short of the shared edge
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = g;
  bad.center_isolation_db = -3.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = g;
  bad.center_isolation_db = 0.0;  // unmodified link gains are allowed
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("user counts validation") {
  UserCounts counts;
  counts.k_users = {4, 4};
  counts.k_edge = {1, 1};
  CHECK_NOTHROW(counts.validate());
  CHECK(counts.k_total() == 8);
  CHECK(counts.k_e() == 2);
  CHECK(counts.k_center(0) == 3);

  counts.k_edge = {4, 1};
  CHECK_THROWS_AS(counts.validate(), ConfigError);
  counts.k_edge = {-1, 1};
  CHECK_THROWS_AS(counts.validate(), ConfigError);
}

TEST_CASE("drop_users respects the role bands and the column order") {
  const Geometry geom = default_geometry();
  UserCounts counts;
  counts.k_users = {5, 4};
  counts.k_edge = {2, 1};
  Rng rng(101);

  const double r = geom.cell_radius_m;
  const double apothem = geom.apothem_m();
  const auto bs = geom.bs_positions();

  for (int rep = 0; rep < 300; ++rep) {
    const UserDrop drop = drop_users(geom, counts, rng);
    REQUIRE(static_cast<int>(drop.positions.size()) == counts.k_total());

    // Global order: edge of cell 1, edge of cell 2, centres of 1, centres of 2.
    const std::vector<int> expected_bs = {0, 0, 1, 0, 0, 0, 1, 1, 1};
    for (int u = 0; u < counts.k_total(); ++u) {
      CHECK(drop.serving_bs[static_cast<std::size_t>(u)] == expected_bs[static_cast<std::size_t>(u)]);
      const bool is_edge = u < counts.k_e();
      CHECK((drop.roles[static_cast<std::size_t>(u)] == UserRole::edge) == is_edge);

      const double d = serving_distance(drop, geom, u);
      if (is_edge) {
        CHECK(d >= 0.95 * r - 1e-9);
        CHECK(d <= 1.05 * r + 1e-9);
        // Restricted to the half-plane beyond the shared edge.
        const Eigen::Vector2d p = drop.positions[static_cast<std::size_t>(u)];
        if (drop.serving_bs[static_cast<std::size_t>(u)] == 0) {
          CHECK(p.x() >= apothem - 1e-9);
        } else {
          CHECK(p.x() <= bs[1].x() - apothem + 1e-9);
        }
      } else {
        CHECK(d <= geom.center_spread_z * r + 1e-9);
      }
    }
  }
}

TEST_CASE("no edge users means everyone stays within the centre disc") {
  const Geometry geom = default_geometry();
  UserCounts counts;
  counts.k_users = {3, 3};
  counts.k_edge = {0, 0};
  Rng rng(103);
  for (int rep = 0; rep < 50; ++rep) {
    const UserDrop drop = drop_users(geom, counts, rng);
    for (int u = 0; u < counts.k_total(); ++u) {
      CHECK(serving_distance(drop, geom, u) <=
            geom.center_spread_z * geom.cell_radius_m + 1e-9);
    }
  }
}

TEST_CASE("draw_channel realizes the large-scale gain in expectation") {
  const Geometry geom = default_geometry();
  UserCounts counts;
  counts.k_users = {2, 2};
  counts.k_edge = {1, 1};
  Rng rng(107);

  const UserDrop drop = drop_users(geom, counts, rng);
  double ratio_sum = 0.0;
  int links = 0;
  const int draws = 4000;
  for (int rep = 0; rep < draws; ++rep) {
    const ChannelRealization chans =
        draw_channel(drop, geom, {4, 4}, 8, 2.0, 25.0, rng);
    for (int b = 0; b < 2; ++b) {
      for (int u = 0; u < counts.k_total(); ++u) {
        ratio_sum += chans.h(b, u).squaredNorm() / chans.alpha[static_cast<std::size_t>(b)][u];
        ++links;
      }
    }
  }
  // Per-draw scatter of ‖h‖²/α is O(1); the mean over 32k link draws sits
  // well within 5 % of 1.
  CHECK(ratio_sum / static_cast<double>(links) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("channel dimensions, alpha positivity, and edge NLOS forcing") {
  const Geometry geom = default_geometry();
  UserCounts counts;
  counts.k_users = {4, 3};
  counts.k_edge = {1, 2};
  Rng rng(109);
  for (int rep = 0; rep < 20; ++rep) {
    const UserDrop drop = drop_users(geom, counts, rng);
    const ChannelRealization chans = draw_channel(drop, geom, {6, 5}, 8, 2.0, 25.0, rng);
    CHECK(chans.h_bs[0].rows() == 6);
    CHECK(chans.h_bs[1].rows() == 5);
    CHECK(chans.h_bs[0].cols() == counts.k_total());
    CHECK(chans.h_common(0).cols() == counts.k_e());
    CHECK(chans.h_center(0, 0).cols() == counts.k_center(0));
    CHECK(chans.h_center(1, 1).cols() == counts.k_center(1));
    for (int b = 0; b < 2; ++b) {
      CHECK(chans.alpha[static_cast<std::size_t>(b)].minCoeff() > 0.0);
      for (int u = 0; u < counts.k_e(); ++u) {
        CHECK_FALSE(chans.los[static_cast<std::size_t>(b)][static_cast<std::size_t>(u)]);
      }
    }
  }
}

TEST_CASE("centre isolation shifts only the cross links, by the exact amount") {
  Geometry geom = default_geometry();
  UserCounts counts;
  counts.k_users = {3, 3};
  counts.k_edge = {1, 1};
  Rng drop_rng(113);
  const UserDrop drop = drop_users(geom, counts, drop_rng);

  geom.center_isolation_db = 15.0;
  Rng rng_a(1);
  const ChannelRealization iso = draw_channel(drop, geom, {4, 4}, 8, 2.0, 25.0, rng_a);
  geom.center_isolation_db = 0.0;
  Rng rng_b(1);
  const ChannelRealization raw = draw_channel(drop, geom, {4, 4}, 8, 2.0, 25.0, rng_b);

  const double factor = std::pow(10.0, -1.5);  // −15 dB in linear power
  for (int b = 0; b < 2; ++b) {
    for (int u = 0; u < counts.k_total(); ++u) {
      const double a_iso = iso.alpha[static_cast<std::size_t>(b)][u];
      const double a_raw = raw.alpha[static_cast<std::size_t>(b)][u];
      const bool is_center = u >= counts.k_e();
      const bool cross_link = is_center && drop.serving_bs[static_cast<std::size_t>(u)] != b;
      if (cross_link) {
        CHECK(a_iso / a_raw == doctest::Approx(factor).epsilon(1e-12));
      } else {
        CHECK(a_iso == a_raw);
      }
    }
  }
}

TEST_CASE("near-far structure: centre users dominate their serving site") {
  const Geometry geom = default_geometry();  // default isolation
  UserCounts counts;
  counts.k_users = {8, 8};
  counts.k_edge = {1, 1};
  Rng rng(127);

  std::vector<double> ratios_db;
  for (int rep = 0; rep < 60; ++rep) {
    const UserDrop drop = drop_users(geom, counts, rng);
    const ChannelRealization chans = draw_channel(drop, geom, {4, 4}, 8, 2.0, 25.0, rng);
    for (int u = counts.k_e(); u < counts.k_total(); ++u) {
      const int serve = drop.serving_bs[static_cast<std::size_t>(u)];
      const double gp = chans.alpha[static_cast<std::size_t>(serve)][u];
      const double gf = chans.alpha[static_cast<std::size_t>(1 - serve)][u];
      ratios_db.push_back(10.0 * std::log10(gp / gf));
    }
  }
  std::sort(ratios_db.begin(), ratios_db.end());
  const double median = ratios_db[ratios_db.size() / 2];
  CHECK(median > 20.0);
}

TEST_CASE("constants file round-trips against the built-in defaults") {
  const UmaConstants file = load_uma_constants(CCADET_DATA_DIR "/tr38901_uma.txt");
  const UmaConstants def = UmaConstants::defaults();
  CHECK(file.los_d0_m == def.los_d0_m);
  CHECK(file.los_decay_m == def.los_decay_m);
  CHECK(file.los_const_db == def.los_const_db);
  CHECK(file.los_slope1 == def.los_slope1);
  CHECK(file.los_slope2 == def.los_slope2);
  CHECK(file.los_fc_slope == def.los_fc_slope);
  CHECK(file.los_bp_corr == def.los_bp_corr);
  CHECK(file.nlos_const_db == def.nlos_const_db);
  CHECK(file.nlos_slope == def.nlos_slope);
  CHECK(file.nlos_fc_slope == def.nlos_fc_slope);
  CHECK(file.nlos_hut_slope == def.nlos_hut_slope);
  CHECK(file.nlos_hut_ref_m == def.nlos_hut_ref_m);
  CHECK(file.h_bs_m == def.h_bs_m);
  CHECK(file.h_ut_m == def.h_ut_m);
  CHECK(file.h_e_m == def.h_e_m);
  CHECK(file.d2d_min_m == def.d2d_min_m);
  CHECK(file.d2d_max_m == def.d2d_max_m);
}

TEST_CASE("constants file schema violations are rejected") {
  const std::string bogus = write_temp("ccadet_uma_bogus.txt", "not_a_key 1.0\n");
  CHECK_THROWS_AS(load_uma_constants(bogus), ConfigError);

  const std::string missing = write_temp("ccadet_uma_missing.txt", "los_d0_m\n");
  CHECK_THROWS_AS(load_uma_constants(missing), ConfigError);

  const std::string junk = write_temp("ccadet_uma_junk.txt", "los_d0_m 18.0 trailing\n");
  CHECK_THROWS_AS(load_uma_constants(junk), ConfigError);

  CHECK_THROWS_AS(load_uma_constants("/tmp/ccadet_no_such_file.txt"), ConfigError);
  std::remove(bogus.c_str());
  std::remove(missing.c_str());
  std::remove(junk.c_str());
}

}  // TEST_SUITE("channel")

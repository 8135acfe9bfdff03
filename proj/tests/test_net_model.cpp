#include <doctest.h>

#include <set>
#include <sstream>
#include <tuple>

#include "uavris/net_model.hpp"

using namespace uavris;
using doctest::Approx;

TEST_CASE("power unit conversions hit known values and round-trip") {
  CHECK(dbm_to_watts(-120.0) == Approx(1e-15).epsilon(1e-12));
  CHECK(dbm_to_watts(30.0) == Approx(1.0).epsilon(1e-12));
  CHECK(dbm_to_watts(42.0) == Approx(15.848931924611142).epsilon(1e-12));
  CHECK(db_to_linear(5.0) == Approx(3.1622776601683795).epsilon(1e-12));
  for (double dbm : {-120.0, -30.0, 0.0, 37.8, 42.0})
    CHECK(watts_to_dbm(dbm_to_watts(dbm)) == Approx(dbm).epsilon(1e-9));
  for (double db : {-10.0, 0.0, 5.0, 45.0})
    CHECK(linear_to_db(db_to_linear(db)) == Approx(db).epsilon(1e-9));
  CHECK_THROWS_AS(watts_to_dbm(0.0), ValidationError);
  CHECK_THROWS_AS(watts_to_dbm(-1.0), ValidationError);
  CHECK_THROWS_AS(linear_to_db(0.0), ValidationError);
}

TEST_CASE("wavelengths derive from the carrier frequencies") {
  NetworkConfig cfg = default_config();
  CHECK(cfg.wavelength() == Approx(0.19986163866666667).epsilon(1e-9));
  CHECK(cfg.wavelength() * cfg.carrier_frequency_hz ==
        Approx(kSpeedOfLight).epsilon(1e-12));
  CHECK(cfg.mmw_wavelength() == Approx(0.0107068735).epsilon(1e-9));
}

TEST_CASE("seed derivation separates streams and is order-sensitive") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
  CHECK(derive_seed(7, 0x11, 0, 0, 0) != derive_seed(7, 0x22, 0, 0, 0));
}

TEST_CASE("grid waypoints follow the per-axis linear formula") {
  GridSpec g;  // defaults: [-100,100]^2 x [30,100], 5 per axis
  const Position first = grid_center(g, 1, 1, 1);
  CHECK(first.x == Approx(g.x_min));
  CHECK(first.y == Approx(g.y_min));
  CHECK(first.z == Approx(g.h_min));

  GridSpec g2;
  g2.x_min = 0.0;
  g2.x_max = 100.0;
  g2.resolution = 5;
  CHECK(grid_center(g2, 3, 1, 1).x == Approx(40.0));

  CHECK(grid_center(g, 1, 1, 5).z == Approx(86.0));
}

TEST_CASE("grid waypoints are pairwise distinct and bounds-checked") {
  GridSpec g;
  std::set<std::tuple<double, double, double>> seen;
  for (int k1 = 1; k1 <= g.resolution; ++k1)
    for (int k2 = 1; k2 <= g.resolution; ++k2)
      for (int k3 = 1; k3 <= g.resolution; ++k3) {
        const Position p = grid_center(g, k1, k2, k3);
        seen.insert({p.x, p.y, p.z});
      }
  CHECK((int)seen.size() == g.resolution * g.resolution * g.resolution);

  CHECK_THROWS_AS(grid_center(g, 0, 1, 1), ValidationError);
  CHECK_THROWS_AS(grid_center(g, 1, 6, 1), ValidationError);
  CHECK_THROWS_AS(grid_center(g, 1, 1, -2), ValidationError);
}

TEST_CASE("default scenario is internally consistent") {
  NetworkConfig cfg = default_config();
  CHECK(cfg.num_sues() == 4);
  CHECK(cfg.sue_index(1, 1) == 3);
  CHECK(cfg.ris_elements() == 4);
  CHECK(cfg.dc_partner(0, 1) == 0);
  CHECK(cfg.dc_partner(1, 0) == 1);
  // scatter power defaults to the inverse of the Rician factor
  CHECK(cfg.scatter_power() == Approx(1.0 / 3.1622776601683795).epsilon(1e-12));
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("validation rejects broken cross-field relations") {
  NetworkConfig cfg = default_config();

  SUBCASE("altitude band inverted") {
    cfg.grid.h_min = 100.0;
    cfg.grid.h_max = 30.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("dual-connectivity map must cover every microwave user") {
    cfg.dc_map = {0, 0, 0, 0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("dc_map entry out of range") {
    cfg.dc_map = {0, 0, 1, 5};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("topology lists must match the counts") {
    cfg.sue_positions.pop_back();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("drain efficiency outside (0,1]") {
    cfg.drain_eff_sbs = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("nonpositive noise") {
    cfg.sigma_sq_w = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("config parser applies keys, comments, and unit suffixes") {
  std::istringstream in(
      "# comment line\n"
      "r_min = 3.0   # trailing comment\n"
      "p_max_sbs_dbm = 30\n"
      "rician_factor_db = 0\n"
      "noise_muw_dbm = -90\n"
      "speed_levels_mps = 2.5, 5\n"
      "grid_resolution = 4\n");
  NetworkConfig cfg = parse_config(in);
  CHECK(cfg.r_min == Approx(3.0));
  CHECK(cfg.p_max_sbs_w == Approx(1.0).epsilon(1e-12));
  CHECK(cfg.rician_factor == Approx(1.0).epsilon(1e-12));
  CHECK(cfg.delta_sq_w == Approx(1e-12).epsilon(1e-9));
  REQUIRE(cfg.speed_levels_mps.size() == 2);
  CHECK(cfg.speed_levels_mps[1] == Approx(5.0));
  CHECK(cfg.grid.resolution == 4);
  // untouched keys keep their defaults
  CHECK(cfg.num_sbs == 2);
  CHECK(cfg.p_max_mbs_w == Approx(dbm_to_watts(37.8)).epsilon(1e-12));
}

TEST_CASE("config parser rejects malformed input") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  CHECK_THROWS_WITH_AS(parse("no_such_key = 1\n"), doctest::Contains("no_such_key"),
                       ConfigError);
  CHECK_THROWS_AS(parse("r_min = 1\nr_min = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("r_min 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("r_min = banana\n"), ConfigError);
  CHECK_THROWS_AS(parse("num_sbs = 2.5\n"), ConfigError);
  // counts changed without replacement topology
  CHECK_THROWS_AS(parse("num_sbs = 3\n"), ConfigError);
  // dc_map triple out of range
  CHECK_THROWS_AS(parse("dc_map = 0:0:0, 0:1:0, 1:0:1, 5:5:1\n"), ConfigError);
}

TEST_CASE("shipped scenario files load and validate") {
  NetworkConfig desk = load_config(SOURCE_DIR "/configs/desk.cfg");
  CHECK(desk.num_sbs == 2);
  CHECK(desk.mmw_subcarriers == 4);
  CHECK(desk.r_min == Approx(2.5));

  NetworkConfig full = load_config(SOURCE_DIR "/configs/table1.cfg");
  CHECK(full.ris_elements() == 8);
  CHECK(full.num_uav == 2);
  CHECK(full.mmw_subcarriers == 16);
  CHECK(full.muw_subcarriers == 8);
  CHECK(full.mbs_antennas == 8);
  CHECK(full.sbs_antennas == 4);
  CHECK(full.num_mbs_users == 4);
  CHECK(full.users_per_sbs == 3);
  CHECK(full.p_max_sbs_w == Approx(dbm_to_watts(42.0)).epsilon(1e-12));
  CHECK(full.p_max_mbs_w == Approx(dbm_to_watts(30.0)).epsilon(1e-12));
  CHECK(full.r_min == Approx(1.0));
  CHECK(full.r_min_sbs == Approx(1.0));
  // fallback partner assignment still covers every microwave user
  std::set<int> partners(full.dc_map.begin(), full.dc_map.end());
  CHECK((int)partners.size() == full.num_mbs_users);

  CHECK_THROWS_AS(load_config(SOURCE_DIR "/configs/does_not_exist.cfg"), ConfigError);
}

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uavris/common.hpp"

namespace uavris {

struct Position {
  double x = 0.0, y = 0.0, z = 0.0;  // meters
};

inline double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Cubic lattice of admissible UAV waypoints: `resolution` cells per axis.
struct GridSpec {
  double x_min = -100.0, x_max = 100.0;
  double y_min = -100.0, y_max = 100.0;
  double h_min = 30.0, h_max = 100.0;
  int resolution = 5;
};

/// Returns the waypoint for 1-based lattice indices (k1, k2, k3).
Position grid_center(const GridSpec& g, int k1, int k2, int k3);

/// Full static description of one deployment. Linear units throughout; dB/dBm
/// only appears in the config file syntax and is converted on load.
struct NetworkConfig {
  // counts
  int num_sbs = 2;          // small cells
  int users_per_sbs = 2;    // users attached to each small cell
  int num_mbs_users = 2;    // users served on the microwave band
  int num_uav = 1;
  int mbs_antennas = 4;
  int sbs_antennas = 2;
  int ris_nx = 2, ris_ny = 2;
  int mmw_subcarriers = 4;
  int muw_subcarriers = 2;

  // physics
  double carrier_frequency_hz = 1.5e9;   // microwave band
  double mmw_frequency_hz = 28e9;
  double cell_radius_m = 200.0;
  double path_loss_exponent = 2.0;       // mmW links
  double mmw_extra_loss_db = 45.0;       // blockage/penetration floor on mmW links
  double rician_factor = db_to_linear(5.0);
  double ris_scatter_power = -1.0;       // <0 means "use 1/rician_factor"
  double sigma_sq_w = dbm_to_watts(-120.0);  // mmW noise
  double delta_sq_w = dbm_to_watts(-100.0);  // microwave noise
  double p_max_sbs_w = dbm_to_watts(42.0);
  double p_max_mbs_w = dbm_to_watts(37.8);
  double r_min = 2.5;       // bps/Hz floor on the dual-connectivity sum
  double r_min_sbs = 0.5;   // bps/Hz floor on each small-cell pair
  double drain_eff_sbs = 1.0;
  double drain_eff_mbs = 1.0;

  // mobility
  double v_max_mps = 10.0;
  double a_max_mps2 = 1.0;
  double slot_duration_s = 4.0;
  int num_slots = 6;

  GridSpec grid;

  // topology
  Position mbs_position{0.0, 0.0, 25.0};
  std::vector<Position> sbs_positions;
  std::vector<Position> sue_positions;  // row-major: [sbs][user]
  std::vector<Position> mue_positions;
  std::vector<Position> uav_init_positions;

  /// dc_map[sue_index(j,i)] = microwave-band user whose rate joins that
  /// user's dual-connectivity constraint. Must cover every MBS user.
  std::vector<int> dc_map;

  // action space
  std::vector<double> speed_levels_mps{5.0, 10.0};
  int phase_patterns = 8;
  int rho_patterns = 2;
  int phase_grid = 100;  // quantization points over [0, 2pi)
  long max_actions = 100000;

  double wavelength() const { return kSpeedOfLight / carrier_frequency_hz; }
  double mmw_wavelength() const { return kSpeedOfLight / mmw_frequency_hz; }
  int ris_elements() const { return ris_nx * ris_ny; }
  int num_sues() const { return num_sbs * users_per_sbs; }
  int sue_index(int j, int i) const { return j * users_per_sbs + i; }
  int dc_partner(int j, int i) const { return dc_map.at(sue_index(j, i)); }
  double scatter_power() const {
    return ris_scatter_power >= 0.0 ? ris_scatter_power : 1.0 / rician_factor;
  }

  void validate() const;
};

/// Desk-scale deployment used by the test suite and as the CLI fallback.
NetworkConfig default_config();

/// Parses `key = value` lines ('#' starts a comment). Unknown keys are an
/// error; omitted keys keep their defaults. See configs/desk.cfg for the schema.
NetworkConfig parse_config(std::istream& in);
NetworkConfig load_config(const std::string& path);

}  // namespace uavris

#include "uavris/net_model.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace uavris {

Position grid_center(const GridSpec& g, int k1, int k2, int k3) {
  if (g.resolution < 1) throw ValidationError("grid resolution must be >= 1");
  auto check = [&](int k, const char* name) {
    if (k < 1 || k > g.resolution)
      throw ValidationError(std::string("grid index ") + name + " out of range");
  };
  check(k1, "k1");
  check(k2, "k2");
  check(k3, "k3");
  const double K = g.resolution;
  return Position{g.x_min + (g.x_max - g.x_min) / K * (k1 - 1),
                  g.y_min + (g.y_max - g.y_min) / K * (k2 - 1),
                  g.h_min + (g.h_max - g.h_min) / K * (k3 - 1)};
}

NetworkConfig default_config() {
  NetworkConfig c;
  c.sbs_positions = {{-60.0, 40.0, 10.0}, {60.0, -40.0, 10.0}};
  c.sue_positions = {{-75.0, 55.0, 1.5}, {-45.0, 30.0, 1.5},
                     {75.0, -55.0, 1.5}, {45.0, -30.0, 1.5}};
  c.mue_positions = {{-75.0, 55.0, 1.5}, {75.0, -55.0, 1.5}};
  c.uav_init_positions = {{0.0, 0.0, 47.5}};
  c.dc_map = {0, 0, 1, 1};
  c.validate();
  return c;
}

void NetworkConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(num_sbs >= 1, "num_sbs must be >= 1");
  require(users_per_sbs >= 1, "users_per_sbs must be >= 1");
  require(num_mbs_users >= 1, "num_mbs_users must be >= 1");
  require(num_uav >= 1, "num_uav must be >= 1");
  require(mbs_antennas >= 1, "mbs_antennas must be >= 1");
  require(sbs_antennas >= 1, "sbs_antennas must be >= 1");
  require(ris_nx >= 1 && ris_ny >= 1, "ris panel dimensions must be >= 1");
  require(mmw_subcarriers >= 1, "mmw_subcarriers must be >= 1");
  require(muw_subcarriers >= 1, "muw_subcarriers must be >= 1");
  require(carrier_frequency_hz > 0.0, "carrier_frequency_hz must be positive");
  require(mmw_frequency_hz > 0.0, "mmw_frequency_hz must be positive");
  require(cell_radius_m > 0.0, "cell_radius_m must be positive");
  require(path_loss_exponent > 0.0, "path_loss_exponent must be positive");
  require(mmw_extra_loss_db >= 0.0, "mmw_extra_loss_db must be >= 0");
  require(rician_factor >= 0.0, "rician_factor must be >= 0");
  require(sigma_sq_w > 0.0, "mmW noise power must be positive");
  require(delta_sq_w > 0.0, "microwave noise power must be positive");
  require(p_max_sbs_w > 0.0, "p_max_sbs must be positive");
  require(p_max_mbs_w > 0.0, "p_max_mbs must be positive");
  require(r_min >= 0.0, "r_min must be >= 0");
  require(r_min_sbs >= 0.0, "r_min_sbs must be >= 0");
  require(drain_eff_sbs > 0.0 && drain_eff_sbs <= 1.0, "drain_eff_sbs must be in (0, 1]");
  require(drain_eff_mbs > 0.0 && drain_eff_mbs <= 1.0, "drain_eff_mbs must be in (0, 1]");
  require(grid.h_min > 0.0, "h_min must be positive");
  require(grid.h_min <= grid.h_max, "h_min must not exceed h_max");
  require(grid.x_min < grid.x_max && grid.y_min < grid.y_max, "grid extents must be nonempty");
  require(grid.resolution >= 1, "grid resolution must be >= 1");
  require(v_max_mps > 0.0, "v_max must be positive");
  require(a_max_mps2 > 0.0, "a_max must be positive");
  require(slot_duration_s > 0.0, "slot_duration_s must be positive");
  require(num_slots >= 1, "num_slots must be >= 1");

  require((int)sbs_positions.size() == num_sbs, "sbs_positions must list one entry per SBS");
  require((int)sue_positions.size() == num_sues(),
          "sue_positions must list users_per_sbs entries per SBS");
  require((int)mue_positions.size() == num_mbs_users,
          "mue_positions must list one entry per MBS user");
  require((int)uav_init_positions.size() == num_uav,
          "uav_init_positions must list one entry per UAV");
  require((int)dc_map.size() == num_sues(), "dc_map must cover every small-cell user");
  std::vector<bool> covered(num_mbs_users, false);
  for (int m : dc_map) {
    require(m >= 0 && m < num_mbs_users, "dc_map entry out of range");
    covered[m] = true;
  }
  require(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }),
          "dc_map must reference every MBS user at least once");

  require(!speed_levels_mps.empty(), "speed_levels must be nonempty");
  for (double s : speed_levels_mps) require(s > 0.0, "speed levels must be positive");
  require(phase_patterns >= 1, "phase_patterns must be >= 1");
  require(rho_patterns >= 1, "rho_patterns must be >= 1");
  require(phase_grid >= 1, "phase_grid must be >= 1");
  require(max_actions >= 1, "max_actions must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: bad numeric value '" + v + "' for key " + key);
}

int to_int(const std::string& v, const std::string& key) {
  const double x = to_double(v, key);
  const int i = (int)std::llround(x);
  if (std::abs(x - i) > 1e-9) throw ConfigError("config: key " + key + " expects an integer");
  return i;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::vector<Position> to_positions(const std::string& v, const std::string& key) {
  std::vector<Position> out;
  for (const auto& entry : split(v, ';')) {
    if (entry.empty()) continue;
    const auto parts = split(entry, ',');
    if (parts.size() != 3)
      throw ConfigError("config: key " + key + " expects x,y,z triples separated by ';'");
    out.push_back({to_double(parts[0], key), to_double(parts[1], key), to_double(parts[2], key)});
  }
  if (out.empty()) throw ConfigError("config: key " + key + " is empty");
  return out;
}

}  // namespace

NetworkConfig parse_config(std::istream& in) {
  NetworkConfig c = default_config();
  bool saw_dc_map = false, saw_topology = false;

  using Handler = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Handler> handlers;
  auto num = [&](const std::string& key, double& field) {
    handlers[key] = [&field](const std::string& k, const std::string& v) {
      field = to_double(v, k);
    };
  };
  auto integer = [&](const std::string& key, int& field) {
    handlers[key] = [&field](const std::string& k, const std::string& v) {
      field = to_int(v, k);
    };
  };
  auto positions = [&](const std::string& key, std::vector<Position>& field, bool* flag) {
    handlers[key] = [&field, flag](const std::string& k, const std::string& v) {
      field = to_positions(v, k);
      if (flag) *flag = true;
    };
  };

  integer("num_sbs", c.num_sbs);
  integer("users_per_sbs", c.users_per_sbs);
  integer("num_mbs_users", c.num_mbs_users);
  integer("num_uav", c.num_uav);
  integer("mbs_antennas", c.mbs_antennas);
  integer("sbs_antennas", c.sbs_antennas);
  integer("ris_nx", c.ris_nx);
  integer("ris_ny", c.ris_ny);
  integer("mmw_subcarriers", c.mmw_subcarriers);
  integer("muw_subcarriers", c.muw_subcarriers);
  num("carrier_frequency_hz", c.carrier_frequency_hz);
  num("mmw_frequency_hz", c.mmw_frequency_hz);
  num("cell_radius_m", c.cell_radius_m);
  num("path_loss_exponent", c.path_loss_exponent);
  num("mmw_extra_loss_db", c.mmw_extra_loss_db);
  handlers["rician_factor_db"] = [&c](const std::string& k, const std::string& v) {
    c.rician_factor = db_to_linear(to_double(v, k));
  };
  num("ris_scatter_power", c.ris_scatter_power);
  handlers["noise_mmw_dbm"] = [&c](const std::string& k, const std::string& v) {
    c.sigma_sq_w = dbm_to_watts(to_double(v, k));
  };
  handlers["noise_muw_dbm"] = [&c](const std::string& k, const std::string& v) {
    c.delta_sq_w = dbm_to_watts(to_double(v, k));
  };
  handlers["p_max_sbs_dbm"] = [&c](const std::string& k, const std::string& v) {
    c.p_max_sbs_w = dbm_to_watts(to_double(v, k));
  };
  handlers["p_max_mbs_dbm"] = [&c](const std::string& k, const std::string& v) {
    c.p_max_mbs_w = dbm_to_watts(to_double(v, k));
  };
  num("r_min", c.r_min);
  num("r_min_sbs", c.r_min_sbs);
  num("drain_eff_sbs", c.drain_eff_sbs);
  num("drain_eff_mbs", c.drain_eff_mbs);
  num("v_max_mps", c.v_max_mps);
  num("a_max_mps2", c.a_max_mps2);
  num("slot_duration_s", c.slot_duration_s);
  integer("num_slots", c.num_slots);
  num("grid_x_min", c.grid.x_min);
  num("grid_x_max", c.grid.x_max);
  num("grid_y_min", c.grid.y_min);
  num("grid_y_max", c.grid.y_max);
  num("grid_h_min", c.grid.h_min);
  num("grid_h_max", c.grid.h_max);
  integer("grid_resolution", c.grid.resolution);
  handlers["mbs_position"] = [&c](const std::string& k, const std::string& v) {
    c.mbs_position = to_positions(v, k).at(0);
  };
  positions("sbs_positions", c.sbs_positions, &saw_topology);
  positions("sue_positions", c.sue_positions, &saw_topology);
  positions("mue_positions", c.mue_positions, &saw_topology);
  positions("uav_init_positions", c.uav_init_positions, &saw_topology);
  handlers["dc_map"] = [&](const std::string& k, const std::string& v) {
    // triples sbs:user:mbs_user, comma separated
    std::vector<int> map_entries;
    std::vector<std::array<int, 3>> triples;
    for (const auto& entry : split(v, ',')) {
      const auto parts = split(entry, ':');
      if (parts.size() != 3)
        throw ConfigError("config: key " + k + " expects sbs:user:mbs_user triples");
      triples.push_back({to_int(parts[0], k), to_int(parts[1], k), to_int(parts[2], k)});
    }
    c.dc_map.assign(triples.size(), -1);
    for (const auto& t : triples) {
      const long idx = (long)t[0] * c.users_per_sbs + t[1];
      if (t[0] < 0 || t[1] < 0 || idx >= (long)c.dc_map.size())
        throw ConfigError("config: dc_map triple out of range");
      c.dc_map[idx] = t[2];
    }
    for (int m : c.dc_map)
      if (m < 0) throw ConfigError("config: dc_map must assign every small-cell user");
    saw_dc_map = true;
  };
  handlers["speed_levels_mps"] = [&c](const std::string& k, const std::string& v) {
    c.speed_levels_mps.clear();
    for (const auto& s : split(v, ',')) c.speed_levels_mps.push_back(to_double(s, k));
  };
  integer("phase_patterns", c.phase_patterns);
  integer("rho_patterns", c.rho_patterns);
  integer("phase_grid", c.phase_grid);
  handlers["max_actions"] = [&c](const std::string& k, const std::string& v) {
    c.max_actions = (long)to_double(v, k);
  };

  std::string line;
  int lineno = 0;
  std::map<std::string, std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!handlers.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    if (seen.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
    seen[key] = value;
  }
  // Apply counts first so position/dc_map validation sees the right sizes.
  static const char* count_keys[] = {"num_sbs",     "users_per_sbs",  "num_mbs_users",
                                     "num_uav",     "mbs_antennas",   "sbs_antennas",
                                     "ris_nx",      "ris_ny",         "mmw_subcarriers",
                                     "muw_subcarriers"};
  for (const char* k : count_keys) {
    auto it = seen.find(k);
    if (it != seen.end()) handlers[k](k, it->second);
  }
  bool counts_changed = false;
  for (const char* k : count_keys) counts_changed |= seen.count(k) > 0;
  for (const auto& [key, value] : seen) {
    bool is_count = false;
    for (const char* k : count_keys) is_count |= (key == k);
    if (!is_count) handlers[key](key, value);
  }
  if (counts_changed && !saw_dc_map && (int)c.dc_map.size() != c.num_sues()) {
    // Round-robin fallback keeps small files usable when counts change.
    c.dc_map.resize(c.num_sues());
    for (int s = 0; s < c.num_sues(); ++s) c.dc_map[s] = s % c.num_mbs_users;
  }
  if (counts_changed && !saw_topology) {
    throw ConfigError("config: counts changed but topology positions were not provided");
  }
  c.validate();
  return c;
}

NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file " + path);
  return parse_config(in);
}

}  // namespace uavris

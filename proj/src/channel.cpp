#include "uavris/channel.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace uavris {

AodAngles aod_angles(const Position& airborne, const Position& ground) {
  const double dx = airborne.x - ground.x;
  const double dy = airborne.y - ground.y;
  const double dz = airborne.z - ground.z;
  const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (dist <= 0.0) throw ValidationError("aod_angles: coincident nodes");
  AodAngles a;
  a.theta = std::asin(std::clamp(dz / dist, -1.0, 1.0));
  const double horiz = std::hypot(dx, dy);
  if (horiz > 0.0) {
    a.phi = std::acos(std::clamp(dy / horiz, -1.0, 1.0));
  } else {
    a.phi = 0.0;  // overhead: azimuth undefined
  }
  return a;
}

Eigen::VectorXcd aar_vector(const AodAngles& a, int nx, int ny, double d_over_lambda) {
  if (nx < 1 || ny < 1) throw ValidationError("aar_vector: panel dimensions must be >= 1");
  const double step = -2.0 * kPi * d_over_lambda * std::sin(a.theta) * std::cos(a.phi);
  Eigen::VectorXcd v(nx * ny);
  for (int kx = 0; kx < nx; ++kx)
    for (int ky = 0; ky < ny; ++ky)
      v[kx * ny + ky] = std::polar(1.0, step * (kx + ky));
  return v;
}

A2gChannel a2g_channel(const Position& airborne, const Position& ground, double lambda, int nx,
                       int ny) {
  A2gChannel ch;
  ch.dist = distance(airborne, ground);
  if (ch.dist <= 0.0) throw ValidationError("a2g_channel: coincident nodes");
  ch.angles = aod_angles(airborne, ground);
  const double eta = lambda / (4.0 * kPi);
  ch.gain = (eta / ch.dist) * aar_vector(ch.angles, nx, ny);
  return ch;
}

double mmw_path_gain(const NetworkConfig& cfg, double dist) {
  if (dist <= 0.0) throw ValidationError("mmw_path_gain: distance must be positive");
  const double eta = cfg.mmw_wavelength() / (4.0 * kPi);
  return eta * eta * std::pow(10.0, -cfg.mmw_extra_loss_db / 10.0) /
         std::pow(dist, cfg.path_loss_exponent);
}

Eigen::VectorXcd sample_mmw_channel(Rng& rng, const NetworkConfig& cfg, double dist,
                                    bool serving) {
  const int m = cfg.sbs_antennas;
  const double amp = std::sqrt(mmw_path_gain(cfg, dist));
  Eigen::VectorXcd h(m);
  if (serving && cfg.rician_factor > 0.0) {
    const double k = cfg.rician_factor;
    const double los_w = std::sqrt(k / (k + 1.0));
    const double nlos_w = std::sqrt(1.0 / (k + 1.0));
    // direct-path phase set by the propagation delay; identical across draws
    const cd los = std::polar(1.0, -2.0 * kPi * std::fmod(dist / cfg.mmw_wavelength(), 1.0));
    for (int i = 0; i < m; ++i) h[i] = amp * (los_w * los + nlos_w * rng.cgauss());
  } else {
    for (int i = 0; i < m; ++i) h[i] = amp * rng.cgauss();
  }
  return h;
}

Eigen::MatrixXcd mbs_ris_channel(Rng& rng, const NetworkConfig& cfg, const Position& uav) {
  const int n = cfg.ris_elements();
  const int m = cfg.mbs_antennas;
  const double lambda = cfg.wavelength();
  const double d = distance(uav, cfg.mbs_position);
  if (d <= 0.0) throw ValidationError("mbs_ris_channel: UAV on top of the MBS");
  const double eta = lambda / (4.0 * kPi);
  // Departure from the panel toward the MBS, and from the MBS array toward the UAV.
  const Eigen::VectorXcd a_ris = aar_vector(aod_angles(uav, cfg.mbs_position), cfg.ris_nx,
                                            cfg.ris_ny);
  AodAngles mbs_angles = aod_angles(uav, cfg.mbs_position);  // same geometry, opposite roles
  const Eigen::VectorXcd a_mbs = aar_vector(mbs_angles, m, 1);
  Eigen::MatrixXcd g = (eta / d) * (a_ris * a_mbs.adjoint());
  const double scat = cfg.scatter_power();
  if (scat > 0.0) {
    const double s_amp = (eta / d) * std::sqrt(scat);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < m; ++c) g(r, c) += s_amp * rng.cgauss();
  }
  return g;
}

void ChannelSet::validate() const {
  auto check_vec = [](const Eigen::VectorXcd& v, int dim) {
    if (v.size() != dim) throw ValidationError("channel set: inconsistent vector length");
    if (!v.allFinite()) throw ValidationError("channel set: non-finite entry");
  };
  if ((int)mmw.size() != mmw_subcarriers) throw ValidationError("channel set: bad mmw layout");
  for (const auto& per_l : mmw) {
    if ((int)per_l.size() != num_sbs * num_sues)
      throw ValidationError("channel set: bad mmw layout");
    for (const auto& v : per_l) check_vec(v, sbs_antennas);
  }
  if ((int)mbs_ris.size() != muw_subcarriers || (int)ris_mue.size() != muw_subcarriers)
    throw ValidationError("channel set: bad microwave layout");
  for (const auto& per_x : mbs_ris) {
    if ((int)per_x.size() != num_uav) throw ValidationError("channel set: bad microwave layout");
    for (const auto& g : per_x) {
      if (g.rows() != ris_elements || g.cols() != mbs_antennas)
        throw ValidationError("channel set: inconsistent matrix shape");
      if (!g.allFinite()) throw ValidationError("channel set: non-finite entry");
    }
  }
  for (const auto& per_x : ris_mue) {
    if ((int)per_x.size() != num_uav * num_mues)
      throw ValidationError("channel set: bad microwave layout");
    for (const auto& v : per_x) check_vec(v, ris_elements);
  }
}

ChannelSet build_channel_set(const NetworkConfig& cfg, const std::vector<Position>& uav_positions,
                             std::uint64_t master_seed, int slot) {
  if ((int)uav_positions.size() != cfg.num_uav)
    throw ValidationError("build_channel_set: one position per UAV required");
  ChannelSet cs;
  cs.mmw_subcarriers = cfg.mmw_subcarriers;
  cs.muw_subcarriers = cfg.muw_subcarriers;
  cs.num_sbs = cfg.num_sbs;
  cs.num_sues = cfg.num_sues();
  cs.num_uav = cfg.num_uav;
  cs.num_mues = cfg.num_mbs_users;
  cs.sbs_antennas = cfg.sbs_antennas;
  cs.mbs_antennas = cfg.mbs_antennas;
  cs.ris_elements = cfg.ris_elements();

  cs.mmw.resize(cfg.mmw_subcarriers);
  for (int l = 0; l < cfg.mmw_subcarriers; ++l) {
    cs.mmw[l].resize(cfg.num_sbs * cs.num_sues);
    for (int j = 0; j < cfg.num_sbs; ++j) {
      for (int s = 0; s < cs.num_sues; ++s) {
        const bool serving = (s / cfg.users_per_sbs) == j;
        const double dist = distance(cfg.sbs_positions[j], cfg.sue_positions[s]);
        Rng rng(derive_seed(master_seed, 0x11, slot, l, (std::uint64_t)(j * 1000 + s)));
        cs.mmw[l][j * cs.num_sues + s] = sample_mmw_channel(rng, cfg, dist, serving);
      }
    }
  }

  cs.mbs_ris.resize(cfg.muw_subcarriers);
  cs.ris_mue.resize(cfg.muw_subcarriers);
  const double lambda = cfg.wavelength();
  for (int x = 0; x < cfg.muw_subcarriers; ++x) {
    cs.mbs_ris[x].resize(cfg.num_uav);
    cs.ris_mue[x].resize(cfg.num_uav * cs.num_mues);
    for (int u = 0; u < cfg.num_uav; ++u) {
      Rng rng(derive_seed(master_seed, 0x22, slot, x, u));
      cs.mbs_ris[x][u] = mbs_ris_channel(rng, cfg, uav_positions[u]);
      for (int m = 0; m < cs.num_mues; ++m) {
        cs.ris_mue[x][u * cs.num_mues + m] =
            a2g_channel(uav_positions[u], cfg.mue_positions[m], lambda, cfg.ris_nx, cfg.ris_ny)
                .gain;
      }
    }
  }
  cs.validate();
  return cs;
}

namespace {

void dump_vec(std::ostream& out, const char* kind, int a, int b, int c,
              const Eigen::VectorXcd& v) {
  for (int i = 0; i < v.size(); ++i) {
    out << kind << ',' << a << ',' << b << ',' << c << ',' << i << ',' << v[i].real() << ','
        << v[i].imag() << '\n';
  }
}

}  // namespace

void dump_channels(const ChannelSet& cs, std::ostream& out) {
  out.precision(17);
  out << "kind,i0,i1,i2,entry,re,im\n";
  out << "meta," << cs.mmw_subcarriers << ',' << cs.muw_subcarriers << ',' << cs.num_sbs << ','
      << cs.num_sues << ',' << cs.num_uav << '\n';
  out << "meta2," << cs.num_mues << ',' << cs.sbs_antennas << ',' << cs.mbs_antennas << ','
      << cs.ris_elements << ",0\n";
  for (int l = 0; l < cs.mmw_subcarriers; ++l)
    for (int j = 0; j < cs.num_sbs; ++j)
      for (int s = 0; s < cs.num_sues; ++s) dump_vec(out, "mmw", l, j, s, cs.h(l, j, s));
  for (int x = 0; x < cs.muw_subcarriers; ++x)
    for (int u = 0; u < cs.num_uav; ++u) {
      const auto& g = cs.g_mbs_ris(x, u);
      for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
          out << "mbs_ris," << x << ',' << u << ',' << r << ',' << c << ',' << g(r, c).real()
              << ',' << g(r, c).imag() << '\n';
      for (int m = 0; m < cs.num_mues; ++m)
        dump_vec(out, "ris_mue", x, u, m, cs.g_ris_mue(x, u, m));
    }
}

ChannelSet load_channels(std::istream& in) {
  ChannelSet cs;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("channel dump: empty stream");
  auto fields = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  };
  bool shaped = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = fields(line);
    if (f[0] == "meta") {
      cs.mmw_subcarriers = std::stoi(f[1]);
      cs.muw_subcarriers = std::stoi(f[2]);
      cs.num_sbs = std::stoi(f[3]);
      cs.num_sues = std::stoi(f[4]);
      cs.num_uav = std::stoi(f[5]);
    } else if (f[0] == "meta2") {
      cs.num_mues = std::stoi(f[1]);
      cs.sbs_antennas = std::stoi(f[2]);
      cs.mbs_antennas = std::stoi(f[3]);
      cs.ris_elements = std::stoi(f[4]);
      cs.mmw.assign(cs.mmw_subcarriers,
                    std::vector<Eigen::VectorXcd>(cs.num_sbs * cs.num_sues,
                                                  Eigen::VectorXcd::Zero(cs.sbs_antennas)));
      cs.mbs_ris.assign(cs.muw_subcarriers,
                        std::vector<Eigen::MatrixXcd>(
                            cs.num_uav, Eigen::MatrixXcd::Zero(cs.ris_elements, cs.mbs_antennas)));
      cs.ris_mue.assign(cs.muw_subcarriers,
                        std::vector<Eigen::VectorXcd>(cs.num_uav * cs.num_mues,
                                                      Eigen::VectorXcd::Zero(cs.ris_elements)));
      shaped = true;
    } else {
      if (!shaped) throw ValidationError("channel dump: data before metadata");
      const cd v(std::stod(f[f.size() - 2]), std::stod(f[f.size() - 1]));
      if (f[0] == "mmw") {
        cs.mmw.at(std::stoi(f[1]))
            .at(std::stoi(f[2]) * cs.num_sues + std::stoi(f[3]))(std::stoi(f[4])) = v;
      } else if (f[0] == "mbs_ris") {
        cs.mbs_ris.at(std::stoi(f[1])).at(std::stoi(f[2]))(std::stoi(f[3]), std::stoi(f[4])) = v;
      } else if (f[0] == "ris_mue") {
        cs.ris_mue.at(std::stoi(f[1]))
            .at(std::stoi(f[2]) * cs.num_mues + std::stoi(f[3]))(std::stoi(f[4])) = v;
      } else {
        throw ValidationError("channel dump: unknown row kind " + f[0]);
      }
    }
  }
  cs.validate();
  return cs;
}

}  // namespace uavris

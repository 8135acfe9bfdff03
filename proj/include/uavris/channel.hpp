#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "uavris/net_model.hpp"

namespace uavris {

struct AodAngles {
  double theta = 0.0;  // elevation, [0, pi/2] for an airborne transmitter
  double phi = 0.0;    // azimuth as the folded angle from the -y offset axis
};

/// Departure angles from an airborne node toward a ground node. When the
/// airborne node is directly overhead the azimuth is undefined and falls
/// back to 0 (the channel magnitude is continuous across that point).
AodAngles aod_angles(const Position& airborne, const Position& ground);

/// Planar-array response: entry (kx, ky) carries phase
/// -2*pi*(d/lambda)*sin(theta)*cos(phi)*(kx + ky), flattened with kx major.
Eigen::VectorXcd aar_vector(const AodAngles& a, int nx, int ny, double d_over_lambda = 0.5);

struct A2gChannel {
  Eigen::VectorXcd gain;
  AodAngles angles;
  double dist = 0.0;
};

/// Line-of-sight air-to-ground link: sqrt(eta)/dist * array response, with
/// eta = (lambda / 4 pi)^2.
A2gChannel a2g_channel(const Position& airborne, const Position& ground, double lambda, int nx,
                       int ny);

/// Small-cell link draw. `dist` in meters; serving links are Rician with the
/// configured factor, cross-cell links are Rayleigh. Mean power equals the
/// distance path loss.
Eigen::VectorXcd sample_mmw_channel(Rng& rng, const NetworkConfig& cfg, double dist,
                                    bool serving);

/// Per-entry mean power of a mmW link at distance `dist`.
double mmw_path_gain(const NetworkConfig& cfg, double dist);

/// MBS-to-RIS link: line-of-sight outer product of the two array responses
/// plus a small scattered component so the matrix is not exactly rank one.
Eigen::MatrixXcd mbs_ris_channel(Rng& rng, const NetworkConfig& cfg, const Position& uav);

/// All links of one time slot.
struct ChannelSet {
  int mmw_subcarriers = 0, muw_subcarriers = 0;
  int num_sbs = 0, num_sues = 0, num_uav = 0, num_mues = 0;
  int sbs_antennas = 0, mbs_antennas = 0, ris_elements = 0;

  // mmw[l][j_tx * num_sues + sue]
  std::vector<std::vector<Eigen::VectorXcd>> mmw;
  // mbs_ris[x][u], ris_mue[x][u * num_mues + m]
  std::vector<std::vector<Eigen::MatrixXcd>> mbs_ris;
  std::vector<std::vector<Eigen::VectorXcd>> ris_mue;

  const Eigen::VectorXcd& h(int l, int j_tx, int sue) const {
    return mmw.at(l).at(j_tx * num_sues + sue);
  }
  const Eigen::MatrixXcd& g_mbs_ris(int x, int u) const { return mbs_ris.at(x).at(u); }
  const Eigen::VectorXcd& g_ris_mue(int x, int u, int m) const {
    return ris_mue.at(x).at(u * num_mues + m);
  }

  void validate() const;
};

/// Deterministic in (cfg, uav positions, master_seed, slot); independent of
/// how the UAVs reached their positions, so runs can be replayed exactly.
ChannelSet build_channel_set(const NetworkConfig& cfg, const std::vector<Position>& uav_positions,
                             std::uint64_t master_seed, int slot);

void dump_channels(const ChannelSet& cs, std::ostream& out);
ChannelSet load_channels(std::istream& in);

}  // namespace uavris

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "uavris/channel.hpp"

namespace uavris {

/// Reflection phases of one panel, restricted to a uniform grid over [0, 2pi).
/// Amplitudes are fixed to one.
class PhaseShiftMatrix {
 public:
  PhaseShiftMatrix() = default;
  static PhaseShiftMatrix from_ticks(std::vector<int> ticks, int grid);
  /// Validates that each angle sits on the grid (within 1e-9 radians).
  static PhaseShiftMatrix from_angles(const std::vector<double>& angles, int grid);

  int size() const { return (int)ticks_.size(); }
  int grid() const { return grid_; }
  double angle(int n) const { return 2.0 * kPi * ticks_[n] / grid_; }
  const std::vector<int>& ticks() const { return ticks_; }
  Eigen::VectorXcd phasor() const;  // entries e^{j angle}

 private:
  std::vector<int> ticks_;
  int grid_ = 1;
};

struct MmwBeam {
  int user = -1;  // cell-local index
  Eigen::VectorXcd w;
};

struct MuwBeam {
  int mue = -1;
  Eigen::VectorXcd w;
};

/// Transmit side of one slot; only active beams are listed.
struct BeamformerSet {
  std::vector<std::vector<std::vector<MmwBeam>>> mmw;  // [l][j] -> beams
  std::vector<std::vector<MuwBeam>> muw;               // [x] -> beams

  static BeamformerSet empty(int mmw_subcarriers, int num_sbs, int muw_subcarriers);
  const Eigen::VectorXcd* find_mmw(int l, int j, int user) const;
};

/// Scheduling state of one slot.
struct AllocationSet {
  struct Pair {
    int strong = -1;
    int weak = -1;  // -1: single-user (orthogonal) assignment
    bool active() const { return strong >= 0; }
    bool is_pair() const { return strong >= 0 && weak >= 0; }
  };
  std::vector<std::vector<Pair>> pair;  // [l][j]
  std::vector<std::vector<int>> rho;    // [x][mue] in {0,1}

  static AllocationSet empty(int mmw_subcarriers, int num_sbs, int muw_subcarriers, int num_mues);
};

namespace rates {

/// Interference power received by `sue_rx` on subcarrier l from every SBS
/// other than j_own.
double cross_cell_interference(const ChannelSet& cs, const BeamformerSet& beams, int l, int j_own,
                               int sue_rx);

/// Paired-transmission rates (strong decodes and cancels the weak user's
/// message; the weak user treats the strong beam as noise). Returns zero for
/// both when the pair is not scheduled on l.
std::pair<double, double> mmw_rate_pair(const ChannelSet& cs, const BeamformerSet& beams,
                                        const AllocationSet& alloc, const NetworkConfig& cfg,
                                        int j, int i_strong, int i_weak, int l);

/// Single-user rate on subcarrier l (orthogonal access).
double mmw_rate_single(const ChannelSet& cs, const BeamformerSet& beams,
                       const AllocationSet& alloc, const NetworkConfig& cfg, int j, int i, int l);

/// Decode-order margin: nonpositive when the strong user can decode the weak
/// user's message at least as reliably as the weak user itself.
double sic_gap(const ChannelSet& cs, const BeamformerSet& beams, const NetworkConfig& cfg, int j,
               int i_strong, int i_weak, int l);

/// Cascaded microwave channel seen by MUE m on subcarrier x, folded with the
/// panel phases: e = sum_u (diag(g_u) Theta_u G_u)^H ... reported as the
/// effective MISO vector so |e^H w|^2 is the received power.
Eigen::VectorXcd muw_effective_vector(const ChannelSet& cs,
                                      const std::vector<PhaseShiftMatrix>& phases, int m, int x);

double muw_rate(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                const BeamformerSet& beams, const AllocationSet& alloc, const NetworkConfig& cfg,
                int m, int x);

/// Drain-efficiency-weighted sum of all active beam powers.
double total_power(const BeamformerSet& beams, const NetworkConfig& cfg);

// ---- lifted (trace) forms ----------------------------------------------
// All matrix arguments must be Hermitian; a ValidationError is raised
// otherwise. With rank-one lifts these reproduce the vector forms exactly.

double trace_quad(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& w);

std::pair<double, double> mmw_rate_pair_trace(const Eigen::MatrixXcd& h_strong,
                                              const Eigen::MatrixXcd& h_weak,
                                              const Eigen::MatrixXcd& w_strong,
                                              const Eigen::MatrixXcd& w_weak, double cci_strong,
                                              double cci_weak, double sigma_sq);

double sic_gap_trace(const Eigen::MatrixXcd& h_strong, const Eigen::MatrixXcd& h_weak,
                     const Eigen::MatrixXcd& w_strong, const Eigen::MatrixXcd& w_weak,
                     double cci_strong, double cci_weak, double sigma_sq);

double muw_rate_trace(const Eigen::MatrixXcd& q, const Eigen::MatrixXcd& w, double delta_sq);

double total_power_trace(const std::vector<Eigen::MatrixXcd>& sbs_lifts,
                         const std::vector<Eigen::MatrixXcd>& mbs_lifts,
                         const NetworkConfig& cfg);

}  // namespace rates
}  // namespace uavris

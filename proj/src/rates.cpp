#include "uavris/rates.hpp"

#include <cmath>

namespace uavris {

PhaseShiftMatrix PhaseShiftMatrix::from_ticks(std::vector<int> ticks, int grid) {
  if (grid < 1) throw ValidationError("phase grid must be >= 1");
  PhaseShiftMatrix p;
  for (int& t : ticks) {
    t %= grid;
    if (t < 0) t += grid;
  }
  p.ticks_ = std::move(ticks);
  p.grid_ = grid;
  return p;
}

PhaseShiftMatrix PhaseShiftMatrix::from_angles(const std::vector<double>& angles, int grid) {
  if (grid < 1) throw ValidationError("phase grid must be >= 1");
  std::vector<int> ticks(angles.size());
  for (size_t n = 0; n < angles.size(); ++n) {
    const double step = 2.0 * kPi / grid;
    double a = std::fmod(angles[n], 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    const int k = (int)std::llround(a / step) % grid;
    if (std::abs(a - k * step) > 1e-9 && std::abs(a - k * step - 2.0 * kPi) > 1e-9)
      throw ValidationError("phase angle off the quantization grid");
    ticks[n] = k;
  }
  return from_ticks(std::move(ticks), grid);
}

Eigen::VectorXcd PhaseShiftMatrix::phasor() const {
  Eigen::VectorXcd v(size());
  for (int n = 0; n < size(); ++n) v[n] = std::polar(1.0, angle(n));
  return v;
}

BeamformerSet BeamformerSet::empty(int mmw_subcarriers, int num_sbs, int muw_subcarriers) {
  BeamformerSet b;
  b.mmw.assign(mmw_subcarriers, std::vector<std::vector<MmwBeam>>(num_sbs));
  b.muw.resize(muw_subcarriers);
  return b;
}

const Eigen::VectorXcd* BeamformerSet::find_mmw(int l, int j, int user) const {
  for (const auto& beam : mmw.at(l).at(j))
    if (beam.user == user) return &beam.w;
  return nullptr;
}

AllocationSet AllocationSet::empty(int mmw_subcarriers, int num_sbs, int muw_subcarriers,
                                   int num_mues) {
  AllocationSet a;
  a.pair.assign(mmw_subcarriers, std::vector<Pair>(num_sbs));
  a.rho.assign(muw_subcarriers, std::vector<int>(num_mues, 0));
  return a;
}

namespace rates {

namespace {

double rx_power(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w) {
  const cd v = h.adjoint() * w;
  return std::norm(v);
}

void check_hermitian(const Eigen::MatrixXcd& a, const char* what) {
  if (a.rows() != a.cols()) throw ValidationError(std::string(what) + ": matrix not square");
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError(std::string(what) + ": matrix not Hermitian");
}

double log2_1p(double x) { return std::log2(1.0 + x); }

}  // namespace

double cross_cell_interference(const ChannelSet& cs, const BeamformerSet& beams, int l, int j_own,
                               int sue_rx) {
  double acc = 0.0;
  for (int j = 0; j < cs.num_sbs; ++j) {
    if (j == j_own) continue;
    for (const auto& beam : beams.mmw.at(l).at(j)) acc += rx_power(cs.h(l, j, sue_rx), beam.w);
  }
  return acc;
}

std::pair<double, double> mmw_rate_pair(const ChannelSet& cs, const BeamformerSet& beams,
                                        const AllocationSet& alloc, const NetworkConfig& cfg,
                                        int j, int i_strong, int i_weak, int l) {
  const auto& pair = alloc.pair.at(l).at(j);
  if (!(pair.strong == i_strong && pair.weak == i_weak)) return {0.0, 0.0};
  const Eigen::VectorXcd* ws = beams.find_mmw(l, j, i_strong);
  const Eigen::VectorXcd* ww = beams.find_mmw(l, j, i_weak);
  if (!ws || !ww) throw ValidationError("mmw_rate_pair: scheduled pair lacks beams");
  const int sue_s = cfg.sue_index(j, i_strong);
  const int sue_w = cfg.sue_index(j, i_weak);
  const double cci_s = cross_cell_interference(cs, beams, l, j, sue_s);
  const double cci_w = cross_cell_interference(cs, beams, l, j, sue_w);
  const auto& hs = cs.h(l, j, sue_s);
  const auto& hw = cs.h(l, j, sue_w);
  const double r_strong = log2_1p(rx_power(hs, *ws) / (cci_s + cfg.sigma_sq_w));
  const double r_weak =
      log2_1p(rx_power(hw, *ww) / (cci_w + rx_power(hw, *ws) + cfg.sigma_sq_w));
  return {r_strong, r_weak};
}

double mmw_rate_single(const ChannelSet& cs, const BeamformerSet& beams,
                       const AllocationSet& alloc, const NetworkConfig& cfg, int j, int i,
                       int l) {
  const auto& pair = alloc.pair.at(l).at(j);
  if (!(pair.strong == i && pair.weak < 0)) return 0.0;
  const Eigen::VectorXcd* w = beams.find_mmw(l, j, i);
  if (!w) throw ValidationError("mmw_rate_single: scheduled user lacks a beam");
  const int sue = cfg.sue_index(j, i);
  const double cci = cross_cell_interference(cs, beams, l, j, sue);
  return log2_1p(rx_power(cs.h(l, j, sue), *w) / (cci + cfg.sigma_sq_w));
}

double sic_gap(const ChannelSet& cs, const BeamformerSet& beams, const NetworkConfig& cfg, int j,
               int i_strong, int i_weak, int l) {
  const Eigen::VectorXcd* ws = beams.find_mmw(l, j, i_strong);
  const Eigen::VectorXcd* ww = beams.find_mmw(l, j, i_weak);
  if (!ws || !ww) throw ValidationError("sic_gap: pair lacks beams");
  const int sue_s = cfg.sue_index(j, i_strong);
  const int sue_w = cfg.sue_index(j, i_weak);
  const auto& hs = cs.h(l, j, sue_s);
  const auto& hw = cs.h(l, j, sue_w);
  const double cci_s = cross_cell_interference(cs, beams, l, j, sue_s);
  const double cci_w = cross_cell_interference(cs, beams, l, j, sue_w);
  const double at_weak = rx_power(hw, *ww) / (cci_w + rx_power(hw, *ws) + cfg.sigma_sq_w);
  const double at_strong = rx_power(hs, *ww) / (cci_s + rx_power(hs, *ws) + cfg.sigma_sq_w);
  return log2_1p(at_weak) - log2_1p(at_strong);
}

Eigen::VectorXcd muw_effective_vector(const ChannelSet& cs,
                                      const std::vector<PhaseShiftMatrix>& phases, int m, int x) {
  if ((int)phases.size() != cs.num_uav)
    throw ValidationError("muw_effective_vector: one phase panel per UAV required");
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(cs.mbs_antennas);
  for (int u = 0; u < cs.num_uav; ++u) {
    if (phases[u].size() != cs.ris_elements)
      throw ValidationError("muw_effective_vector: panel size mismatch");
    const Eigen::VectorXcd v = phases[u].phasor();
    const auto& g = cs.g_ris_mue(x, u, m);
    const auto& gm = cs.g_mbs_ris(x, u);
    // row vector g^H diag(v) G, accumulated as its adjoint
    const Eigen::VectorXcd scaled = g.conjugate().cwiseProduct(v);
    e += (scaled.transpose() * gm).adjoint();
  }
  return e;
}

double muw_rate(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                const BeamformerSet& beams, const AllocationSet& alloc, const NetworkConfig& cfg,
                int m, int x) {
  if (!alloc.rho.at(x).at(m)) return 0.0;
  const Eigen::VectorXcd* w = nullptr;
  for (const auto& beam : beams.muw.at(x))
    if (beam.mue == m) w = &beam.w;
  if (!w) throw ValidationError("muw_rate: scheduled MUE lacks a beam");
  const Eigen::VectorXcd e = muw_effective_vector(cs, phases, m, x);
  const cd rx = e.adjoint() * (*w);
  return log2_1p(std::norm(rx) / cfg.delta_sq_w);
}

double total_power(const BeamformerSet& beams, const NetworkConfig& cfg) {
  double sbs = 0.0, mbs = 0.0;
  for (const auto& per_l : beams.mmw)
    for (const auto& per_j : per_l)
      for (const auto& beam : per_j) sbs += beam.w.squaredNorm();
  for (const auto& per_x : beams.muw)
    for (const auto& beam : per_x) mbs += beam.w.squaredNorm();
  return sbs / cfg.drain_eff_sbs + mbs / cfg.drain_eff_mbs;
}

double trace_quad(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& w) {
  check_hermitian(a, "trace_quad lhs");
  check_hermitian(w, "trace_quad rhs");
  if (a.rows() != w.rows()) throw ValidationError("trace_quad: dimension mismatch");
  return (a * w).trace().real();
}

std::pair<double, double> mmw_rate_pair_trace(const Eigen::MatrixXcd& h_strong,
                                              const Eigen::MatrixXcd& h_weak,
                                              const Eigen::MatrixXcd& w_strong,
                                              const Eigen::MatrixXcd& w_weak, double cci_strong,
                                              double cci_weak, double sigma_sq) {
  const double r_strong =
      log2_1p(trace_quad(h_strong, w_strong) / (cci_strong + sigma_sq));
  const double r_weak = log2_1p(trace_quad(h_weak, w_weak) /
                                (cci_weak + trace_quad(h_weak, w_strong) + sigma_sq));
  return {r_strong, r_weak};
}

double sic_gap_trace(const Eigen::MatrixXcd& h_strong, const Eigen::MatrixXcd& h_weak,
                     const Eigen::MatrixXcd& w_strong, const Eigen::MatrixXcd& w_weak,
                     double cci_strong, double cci_weak, double sigma_sq) {
  const double at_weak = trace_quad(h_weak, w_weak) /
                         (cci_weak + trace_quad(h_weak, w_strong) + sigma_sq);
  const double at_strong = trace_quad(h_strong, w_weak) /
                           (cci_strong + trace_quad(h_strong, w_strong) + sigma_sq);
  return log2_1p(at_weak) - log2_1p(at_strong);
}

double muw_rate_trace(const Eigen::MatrixXcd& q, const Eigen::MatrixXcd& w, double delta_sq) {
  return log2_1p(trace_quad(q, w) / delta_sq);
}

double total_power_trace(const std::vector<Eigen::MatrixXcd>& sbs_lifts,
                         const std::vector<Eigen::MatrixXcd>& mbs_lifts,
                         const NetworkConfig& cfg) {
  double sbs = 0.0, mbs = 0.0;
  for (const auto& w : sbs_lifts) {
    check_hermitian(w, "total_power_trace");
    sbs += w.trace().real();
  }
  for (const auto& w : mbs_lifts) {
    check_hermitian(w, "total_power_trace");
    mbs += w.trace().real();
  }
  return sbs / cfg.drain_eff_sbs + mbs / cfg.drain_eff_mbs;
}

}  // namespace rates
}  // namespace uavris

#include "uavris/sca_beamforming.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <utility>

#include "json.hpp"

namespace uavris::sca {

namespace {

double re_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return ((a.array() * b.transpose().array()).sum()).real();
}

// Hermitian coefficient matrices picking out the real / imaginary part of one
// entry: <e_re(p,q), M> = Re M_pq and <e_im(p,q), M> = -Im M_pq for Hermitian M.
Eigen::MatrixXcd e_re(int n, int p, int q) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  if (p == q) {
    m(p, p) = 1.0;
  } else {
    m(p, q) = 0.5;
    m(q, p) = 0.5;
  }
  return m;
}

Eigen::MatrixXcd e_im(int n, int p, int q) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  m(q, p) = cd(0.0, 0.5);
  m(p, q) = cd(0.0, -0.5);
  return m;
}

Point lerp(const Point& a, const Point& b, double t) {
  Point r;
  r.blocks.resize(a.blocks.size());
  r.scalars.resize(a.scalars.size());
  for (size_t i = 0; i < a.blocks.size(); ++i)
    r.blocks[i] = (1.0 - t) * a.blocks[i] + t * b.blocks[i];
  for (size_t i = 0; i < a.scalars.size(); ++i)
    r.scalars[i] = (1.0 - t) * a.scalars[i] + t * b.scalars[i];
  return r;
}

std::string cand_tag(const Candidate& c) {
  std::string s = "l=" + std::to_string(c.subcarrier) + ",j=" + std::to_string(c.sbs) + ",s=" +
                  std::to_string(c.strong);
  if (c.is_pair()) s += ",w=" + std::to_string(c.weak);
  return s;
}

}  // namespace

double AffineArg::eval(const std::vector<Eigen::MatrixXcd>& blocks) const {
  double v = constant;
  for (const auto& [b, coeff] : terms) v += re_inner(coeff, blocks.at(b));
  return v;
}

double LogTangent::eval(const std::vector<Eigen::MatrixXcd>& blocks) const {
  double v = constant;
  for (const auto& [b, g] : grads) v += re_inner(g, blocks.at(b));
  return v;
}

LogTangent linearize_log2(const AffineArg& arg, const std::vector<Eigen::MatrixXcd>& at) {
  const double v = arg.eval(at);
  if (!(v > 0.0)) throw ValidationError("log argument not positive in " + arg.label);
  LogTangent t;
  t.constant = std::log2(v);
  const double scale = 1.0 / (v * std::log(2.0));
  t.grads.reserve(arg.terms.size());
  for (const auto& [b, coeff] : arg.terms) {
    t.grads.emplace_back(b, coeff * scale);
    t.constant -= scale * re_inner(coeff, at.at(b));
  }
  return t;
}

const char* to_string(ScaStatus s) {
  switch (s) {
    case ScaStatus::optimal:
      return "optimal";
    case ScaStatus::infeasible:
      return "infeasible";
    default:
      return "max_iter";
  }
}

// ---------------------------------------------------------------------------
// LiftedProgram
// ---------------------------------------------------------------------------

LiftedProgram::LiftedProgram(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                             const std::vector<std::vector<int>>& rho, const NetworkConfig& cfg,
                             const ScaOptions& opts)
    : cs_(cs), phases_(phases), rho_(rho), cfg_(cfg), opts_(opts) {
  build(nullptr);
}

LiftedProgram::LiftedProgram(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                             const std::vector<std::vector<int>>& rho, const NetworkConfig& cfg,
                             const ScaOptions& opts, std::vector<Candidate> fixed)
    : cs_(cs), phases_(phases), rho_(rho), cfg_(cfg), opts_(opts) {
  build(&fixed);
}

int LiftedProgram::block_dim(int handle) const { return block_dims_.at(handle); }

void LiftedProgram::build(const std::vector<Candidate>* fixed) {
  cs_.validate();
  frozen_ = fixed != nullptr;
  const int n = cfg_.sbs_antennas;
  const int nu = cfg_.users_per_sbs;
  const int num_sues = cs_.num_sues;
  if (cs_.num_sues != cfg_.num_sues() || cs_.num_sbs != cfg_.num_sbs ||
      cs_.sbs_antennas != n || cs_.mbs_antennas != cfg_.mbs_antennas)
    throw ValidationError("channel set does not match the configuration");
  if ((int)rho_.size() != cs_.muw_subcarriers)
    throw ValidationError("microwave schedule has the wrong number of subcarriers");
  for (const auto& row : rho_) {
    if ((int)row.size() != cs_.num_mues)
      throw ValidationError("microwave schedule row has the wrong number of users");
    int active = 0;
    for (int v : row) {
      if (v != 0 && v != 1) throw ValidationError("microwave schedule entries must be 0 or 1");
      active += v;
    }
    if (active > 1) throw ValidationError("microwave subcarrier scheduled to several users");
  }

  // lifted channels in noise units
  hhat_.assign(cs_.mmw_subcarriers, {});
  for (int l = 0; l < cs_.mmw_subcarriers; ++l) {
    hhat_[l].resize(cs_.num_sbs * num_sues);
    for (int j = 0; j < cs_.num_sbs; ++j)
      for (int s = 0; s < num_sues; ++s) {
        const Eigen::VectorXcd& h = cs_.h(l, j, s);
        hhat_[l][j * num_sues + s] = (h * h.adjoint()) / cfg_.sigma_sq_w;
      }
  }

  std::vector<Candidate> cands;
  if (fixed) {
    cands = *fixed;
    for (const auto& c : cands) {
      if (c.sbs < 0 || c.sbs >= cs_.num_sbs || c.subcarrier < 0 ||
          c.subcarrier >= cs_.mmw_subcarriers || c.strong < 0 || c.strong >= nu ||
          c.weak >= nu || (c.is_pair() && c.weak == c.strong))
        throw ValidationError("fixed candidate out of range");
    }
  } else {
    for (int l = 0; l < cs_.mmw_subcarriers; ++l)
      for (int j = 0; j < cs_.num_sbs; ++j) {
        // one-user candidates are always offered; the per-(carrier, cell)
        // selector picks at most one candidate, so sharing stays optional
        // rather than forced whenever a carrier is used
        for (int i = 0; i < nu; ++i) cands.push_back({j, l, i, -1});
        if (!opts_.oma)
          for (int i = 0; i < nu; ++i)
            for (int k = i + 1; k < nu; ++k) {
              const double gi = hhat_[l][j * num_sues + cfg_.sue_index(j, i)].real().trace();
              const double gk = hhat_[l][j * num_sues + cfg_.sue_index(j, k)].real().trace();
              if (gi >= gk)
                cands.push_back({j, l, i, k});
              else
                cands.push_back({j, l, k, i});
            }
      }
  }

  auto add_block = [&](int dim) {
    block_dims_.push_back(dim);
    return layout_.num_blocks++;
  };
  auto add_scalar = [&]() { return layout_.num_scalars++; };

  for (const auto& c : cands) {
    Layout::PairVars pv;
    pv.cand = c;
    pv.wt_strong = add_block(n);
    if (c.is_pair()) pv.wt_weak = add_block(n);
    if (!frozen_) {
      pv.w_strong = add_block(n);
      if (c.is_pair()) pv.w_weak = add_block(n);
      pv.y_cap_s = add_block(n);
      if (c.is_pair()) pv.y_cap_w = add_block(n);
      pv.y_le_s = add_block(n);
      if (c.is_pair()) pv.y_le_w = add_block(n);
      pv.y_ge_s = add_block(n);
      if (c.is_pair()) pv.y_ge_w = add_block(n);
    }
    layout_.pairs.push_back(pv);
  }
  for (int x = 0; x < cs_.muw_subcarriers; ++x)
    for (int m = 0; m < cs_.num_mues; ++m)
      if (rho_[x][m]) layout_.muw.push_back({x, m, add_block(cfg_.mbs_antennas)});
  for (auto& pv : layout_.pairs) {
    if (!frozen_) pv.z = add_scalar();
    if (pv.cand.is_pair()) pv.eta = add_scalar();
  }

  // log-argument decompositions; term order keeps evaluation exact when a
  // role block is identically zero
  for (const auto& pv : layout_.pairs) {
    const Candidate& c = pv.cand;
    PairDecomposition d;
    d.cand = c;
    const int sue_s = cfg_.sue_index(c.sbs, c.strong);
    const Eigen::MatrixXcd& hs = hhat_[c.subcarrier][c.sbs * num_sues + sue_s];
    auto cci_terms = [&](AffineArg& a, int sue_rx) {
      for (const auto& ov : layout_.pairs) {
        if (ov.cand.subcarrier != c.subcarrier || ov.cand.sbs == c.sbs) continue;
        const Eigen::MatrixXcd& hv = hhat_[c.subcarrier][ov.cand.sbs * num_sues + sue_rx];
        a.terms.emplace_back(ov.wt_strong, hv);
        if (ov.cand.is_pair()) a.terms.emplace_back(ov.wt_weak, hv);
      }
    };
    const std::string tag = cand_tag(c);
    d.strong_sig = {"strong_signal(" + tag + ")", 1.0, {{pv.wt_strong, hs}}};
    d.strong_base = {"strong_floor(" + tag + ")", 1.0, {}};
    cci_terms(d.strong_sig, sue_s);
    cci_terms(d.strong_base, sue_s);
    if (c.is_pair()) {
      const int sue_w = cfg_.sue_index(c.sbs, c.weak);
      const Eigen::MatrixXcd& hw = hhat_[c.subcarrier][c.sbs * num_sues + sue_w];
      d.weak_sig = {"weak_signal(" + tag + ")", 1.0, {{pv.wt_strong, hw}, {pv.wt_weak, hw}}};
      d.weak_base = {"weak_floor(" + tag + ")", 1.0, {{pv.wt_strong, hw}}};
      d.strong_cross = {"cross_signal(" + tag + ")", 1.0, {{pv.wt_strong, hs}, {pv.wt_weak, hs}}};
      cci_terms(d.weak_sig, sue_w);
      cci_terms(d.weak_base, sue_w);
      cci_terms(d.strong_cross, sue_s);
      const double gmax = std::max(hs.real().trace(), hw.real().trace());
      d.kappa = std::log2(1.0 + gmax * cfg_.p_max_sbs_w) + 1.0;
    }
    decomps_.push_back(std::move(d));
  }
  for (const auto& mv : layout_.muw) {
    const Eigen::VectorXcd e = rates::muw_effective_vector(cs_, phases_, mv.mue, mv.x);
    AffineArg a;
    a.label = "muw_signal(x=" + std::to_string(mv.x) + ",m=" + std::to_string(mv.mue) + ")";
    a.constant = 1.0;
    a.terms.emplace_back(mv.block, (e * e.adjoint()) / cfg_.delta_sq_w);
    muw_args_.push_back(std::move(a));
  }
}

TermValues LiftedProgram::term_values(int pair_index, const Point& p) const {
  const auto& pv = layout_.pairs.at(pair_index);
  const auto& d = decomps_.at(pair_index);
  auto lg = [&](const AffineArg& a) {
    const double v = a.eval(p.blocks);
    if (!(v > 0.0)) throw ValidationError("log argument not positive in " + a.label);
    return std::log2(v);
  };
  double muw_sum = 0.0;
  const int partner = cfg_.dc_partner(pv.cand.sbs, pv.cand.strong);
  for (size_t k = 0; k < layout_.muw.size(); ++k)
    if (layout_.muw[k].mue == partner) muw_sum += lg(muw_args_[k]);
  TermValues tv;
  if (pv.cand.is_pair()) {
    const double eta = p.scalars.at(pv.eta);
    tv.t = lg(d.weak_sig);
    tv.r = lg(d.weak_base);
    tv.d = lg(d.strong_sig);
    tv.f = tv.d + tv.t + muw_sum;
    tv.g = tv.r + lg(d.strong_base);
    tv.a = tv.t + eta - d.kappa;
    tv.b = tv.r;
    tv.c = lg(d.strong_cross) + eta - d.kappa;
  } else {
    tv.f = lg(d.strong_sig) + muw_sum;
    tv.g = lg(d.strong_base);
  }
  return tv;
}

sdp::SdpProblem LiftedProgram::assemble(const Point& at) const {
  if ((int)at.blocks.size() != layout_.num_blocks || (int)at.scalars.size() != layout_.num_scalars)
    throw ValidationError("expansion point does not match the variable layout");
  const int n = cfg_.sbs_antennas;
  const double psbs = cfg_.p_max_sbs_w;

  sdp::SdpProblem prob;
  for (int d : block_dims_) prob.add_block(d);
  for (int i = 0; i < layout_.num_scalars; ++i) prob.add_scalar();

  const Eigen::MatrixXcd id_s = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd id_m =
      Eigen::MatrixXcd::Identity(cfg_.mbs_antennas, cfg_.mbs_antennas);
  for (const auto& pv : layout_.pairs) {
    prob.objective.add(pv.wt_strong, id_s / cfg_.drain_eff_sbs);
    if (pv.cand.is_pair()) prob.objective.add(pv.wt_weak, id_s / cfg_.drain_eff_sbs);
  }
  for (const auto& mv : layout_.muw) prob.objective.add(mv.block, id_m / cfg_.drain_eff_mbs);
  if (!frozen_) {
    for (const auto& pv : layout_.pairs) {
      const double z0 = at.scalars[pv.z];
      prob.objective.add_scalar(pv.z, opts_.alpha * (1.0 - 2.0 * z0));
      prob.objective_constant += opts_.alpha * z0 * z0;
    }
  }

  struct Tang {
    LogTangent ssig, sbase, wsig, wbase, scross;
  };
  std::vector<Tang> tg(layout_.pairs.size());
  for (size_t i = 0; i < layout_.pairs.size(); ++i) {
    tg[i].ssig = linearize_log2(decomps_[i].strong_sig, at.blocks);
    tg[i].sbase = linearize_log2(decomps_[i].strong_base, at.blocks);
    if (layout_.pairs[i].cand.is_pair()) {
      tg[i].wsig = linearize_log2(decomps_[i].weak_sig, at.blocks);
      tg[i].wbase = linearize_log2(decomps_[i].weak_base, at.blocks);
      tg[i].scross = linearize_log2(decomps_[i].strong_cross, at.blocks);
    }
  }
  std::vector<LogTangent> tmuw;
  for (const auto& a : muw_args_) tmuw.push_back(linearize_log2(a, at.blocks));

  auto add_t = [](sdp::LinearExpr& e, double& c, const LogTangent& t, double sign) {
    c += sign * t.constant;
    for (const auto& [b, g] : t.grads) e.add(b, sign * g);
  };
  auto& rows = prob.constraints;

  // indicator-gating plumbing: entrywise equalities tying each lift to its
  // ungated partner through the slack blocks
  if (!frozen_) {
    auto gate_rows = [&](const std::string& prefix,
                         std::initializer_list<std::pair<int, double>> blocks, int z,
                         double z_diag, double b_diag) {
      for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q) {
          sdp::Constraint c;
          for (const auto& [b, s] : blocks) c.expr.add(b, s * e_re(n, p, q));
          if (z >= 0 && z_diag != 0.0 && p == q) c.expr.add_scalar(z, z_diag);
          c.rel = sdp::Relation::eq;
          c.bound = (p == q) ? b_diag : 0.0;
          c.name = prefix;
          rows.push_back(std::move(c));
          if (q > p) {
            sdp::Constraint ci;
            for (const auto& [b, s] : blocks) ci.expr.add(b, s * e_im(n, p, q));
            ci.rel = sdp::Relation::eq;
            ci.bound = 0.0;
            ci.name = prefix;
            rows.push_back(std::move(ci));
          }
        }
    };
    for (const auto& pv : layout_.pairs) {
      const std::string tag = cand_tag(pv.cand);
      auto member = [&](int wt, int w, int ycap, int yle, int yge, const char* role) {
        const std::string p = tag + "," + role + ")";
        gate_rows("gate_cap(" + p, {{ycap, 1.0}, {wt, 1.0}}, pv.z, -psbs, 0.0);
        gate_rows("gate_le(" + p, {{yle, 1.0}, {w, -1.0}, {wt, 1.0}}, -1, 0.0, 0.0);
        gate_rows("gate_ge(" + p, {{yge, 1.0}, {wt, -1.0}, {w, 1.0}}, pv.z, psbs, psbs);
      };
      member(pv.wt_strong, pv.w_strong, pv.y_cap_s, pv.y_le_s, pv.y_ge_s, "strong");
      if (pv.cand.is_pair())
        member(pv.wt_weak, pv.w_weak, pv.y_cap_w, pv.y_le_w, pv.y_ge_w, "weak");
    }
  }

  // decode-order margins (pairs only)
  for (size_t i = 0; i < layout_.pairs.size(); ++i) {
    const auto& pv = layout_.pairs[i];
    if (!pv.cand.is_pair()) continue;
    const std::string tag = cand_tag(pv.cand);
    {
      sdp::Constraint c;
      double c0 = 0.0;
      add_t(c.expr, c0, tg[i].wsig, 1.0);
      add_t(c.expr, c0, tg[i].wbase, -1.0);
      c.expr.add_scalar(pv.eta, 1.0);
      c.rel = sdp::Relation::le;
      c.bound = decomps_[i].kappa - c0;
      if (frozen_)
        c.bound -= opts_.sic_margin;
      else
        c.expr.add_scalar(pv.z, opts_.sic_margin);
      c.name = "decode_hi(" + tag + ")";
      rows.push_back(std::move(c));
    }
    {
      sdp::Constraint c;
      double c0 = 0.0;
      add_t(c.expr, c0, tg[i].ssig, 1.0);
      add_t(c.expr, c0, tg[i].scross, -1.0);
      c.expr.add_scalar(pv.eta, -1.0);
      c.rel = sdp::Relation::le;
      c.bound = -decomps_[i].kappa - c0;
      if (frozen_)
        c.bound -= opts_.sic_margin;
      else
        c.expr.add_scalar(pv.z, opts_.sic_margin);
      c.name = "decode_lo(" + tag + ")";
      rows.push_back(std::move(c));
    }
  }

  if (!frozen_) {
    for (const auto& pv : layout_.pairs) {
      sdp::Constraint c;
      c.expr.add_scalar(pv.z, 1.0);
      c.rel = sdp::Relation::le;
      c.bound = 1.0;
      c.name = "indicator_cap(" + cand_tag(pv.cand) + ")";
      rows.push_back(std::move(c));
    }
    for (int l = 0; l < cs_.mmw_subcarriers; ++l)
      for (int j = 0; j < cs_.num_sbs; ++j) {
        sdp::Constraint c;
        bool any = false;
        for (const auto& pv : layout_.pairs)
          if (pv.cand.subcarrier == l && pv.cand.sbs == j) {
            c.expr.add_scalar(pv.z, 1.0);
            any = true;
          }
        if (!any) continue;
        c.rel = sdp::Relation::le;
        c.bound = 1.0;
        c.name = "one_pair(l=" + std::to_string(l) + ",j=" + std::to_string(j) + ")";
        rows.push_back(std::move(c));
      }
  }

  for (int j = 0; j < cs_.num_sbs; ++j) {
    sdp::Constraint c;
    bool any = false;
    for (const auto& pv : layout_.pairs)
      if (pv.cand.sbs == j) {
        c.expr.add(pv.wt_strong, id_s);
        if (pv.cand.is_pair()) c.expr.add(pv.wt_weak, id_s);
        any = true;
      }
    if (!any) continue;
    c.rel = sdp::Relation::le;
    c.bound = psbs;
    c.name = "sbs_power(j=" + std::to_string(j) + ")";
    rows.push_back(std::move(c));
  }
  if (!layout_.muw.empty()) {
    sdp::Constraint c;
    for (const auto& mv : layout_.muw) c.expr.add(mv.block, id_m);
    c.rel = sdp::Relation::le;
    c.bound = cfg_.p_max_mbs_w;
    c.name = "mbs_power";
    rows.push_back(std::move(c));
  }

  // per-candidate rate floors, released when the indicator goes to zero
  const double rr = cfg_.r_min_sbs + opts_.rate_margin;
  for (size_t i = 0; i < layout_.pairs.size(); ++i) {
    const auto& pv = layout_.pairs[i];
    const std::string tag = cand_tag(pv.cand);
    auto role_row = [&](const LogTangent& sig, const LogTangent& base, const char* role) {
      sdp::Constraint c;
      double c0 = 0.0;
      add_t(c.expr, c0, sig, 1.0);
      add_t(c.expr, c0, base, -1.0);
      c.rel = sdp::Relation::ge;
      if (frozen_) {
        c.bound = rr - c0;
      } else {
        c.expr.add_scalar(pv.z, -rr);
        c.bound = -c0;
      }
      c.name = std::string("pair_rate_") + role + "(" + tag + ")";
      rows.push_back(std::move(c));
    };
    role_row(tg[i].ssig, tg[i].sbase, "strong");
    if (pv.cand.is_pair()) role_row(tg[i].wsig, tg[i].wbase, "weak");
  }

  // dual-connectivity service floor, one row per small-cell user
  for (int j = 0; j < cs_.num_sbs; ++j)
    for (int iu = 0; iu < cfg_.users_per_sbs; ++iu) {
      sdp::Constraint c;
      double c0 = 0.0;
      for (size_t i = 0; i < layout_.pairs.size(); ++i) {
        const auto& pv = layout_.pairs[i];
        if (pv.cand.sbs != j) continue;
        if (pv.cand.strong == iu) {
          add_t(c.expr, c0, tg[i].ssig, 1.0);
          add_t(c.expr, c0, tg[i].sbase, -1.0);
        } else if (pv.cand.is_pair() && pv.cand.weak == iu) {
          add_t(c.expr, c0, tg[i].wsig, 1.0);
          add_t(c.expr, c0, tg[i].wbase, -1.0);
        }
      }
      const int partner = cfg_.dc_partner(j, iu);
      for (size_t k = 0; k < layout_.muw.size(); ++k)
        if (layout_.muw[k].mue == partner) add_t(c.expr, c0, tmuw[k], 1.0);
      c.rel = sdp::Relation::ge;
      c.bound = cfg_.r_min + opts_.rate_margin - c0;
      c.name = "service_floor(sue=" + std::to_string(cfg_.sue_index(j, iu)) + ")";
      rows.push_back(std::move(c));
    }

  return prob;
}

double LiftedProgram::objective(const Point& p) const {
  double v = 0.0;
  for (const auto& pv : layout_.pairs) {
    v += p.blocks[pv.wt_strong].real().trace() / cfg_.drain_eff_sbs;
    if (pv.cand.is_pair()) v += p.blocks[pv.wt_weak].real().trace() / cfg_.drain_eff_sbs;
  }
  for (const auto& mv : layout_.muw)
    v += p.blocks[mv.block].real().trace() / cfg_.drain_eff_mbs;
  if (!frozen_)
    for (const auto& pv : layout_.pairs) {
      const double z = p.scalars[pv.z];
      v += opts_.alpha * (z - z * z);
    }
  return v;
}

AuditReport LiftedProgram::audit(const Point& p) const {
  AuditReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  if ((int)p.blocks.size() != layout_.num_blocks || (int)p.scalars.size() != layout_.num_scalars)
    throw ValidationError("point does not match the variable layout");
  auto note = [&](double slack, const std::string& name) {
    if (slack < rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_name = name;
    }
  };
  bool domain_ok = true;
  auto lg = [&](const AffineArg& a) {
    const double v = a.eval(p.blocks);
    if (!(v > 0.0)) {
      note(v - 1.0, a.label);
      domain_ok = false;
      return 0.0;
    }
    return std::log2(v);
  };

  for (int h = 0; h < layout_.num_blocks; ++h) {
    const Eigen::MatrixXcd sym = 0.5 * (p.blocks[h] + p.blocks[h].adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym, Eigen::EigenvaluesOnly);
    const double scale = 1.0 + sym.norm();
    note((es.eigenvalues()(0) + 1e-11 * scale) / scale, "psd(block " + std::to_string(h) + ")");
  }

  for (int j = 0; j < cs_.num_sbs; ++j) {
    double pw = 0.0;
    for (const auto& pv : layout_.pairs)
      if (pv.cand.sbs == j) {
        pw += p.blocks[pv.wt_strong].real().trace();
        if (pv.cand.is_pair()) pw += p.blocks[pv.wt_weak].real().trace();
      }
    note((cfg_.p_max_sbs_w - pw) / cfg_.p_max_sbs_w, "sbs_power(j=" + std::to_string(j) + ")");
  }
  if (!layout_.muw.empty()) {
    double pm = 0.0;
    for (const auto& mv : layout_.muw) pm += p.blocks[mv.block].real().trace();
    note((cfg_.p_max_mbs_w - pm) / cfg_.p_max_mbs_w, "mbs_power");
  }

  // the audit checks the true constraints; the safety margins live only in
  // the linearized rows, so binding floors never wedge the line search
  const double rr = cfg_.r_min_sbs;
  for (size_t i = 0; i < layout_.pairs.size(); ++i) {
    const auto& pv = layout_.pairs[i];
    const auto& d = decomps_[i];
    const std::string tag = cand_tag(pv.cand);
    const double z = frozen_ ? 1.0 : p.scalars[pv.z];
    if (!frozen_) {
      note(z, "indicator_low(" + tag + ")");
      note(1.0 - z, "indicator_cap(" + tag + ")");
    }
    note(lg(d.strong_sig) - lg(d.strong_base) - rr * z, "pair_rate_strong(" + tag + ")");
    if (pv.cand.is_pair()) {
      const double eta = p.scalars[pv.eta];
      note(eta, "eta_low(" + tag + ")");
      const double weak_rate = lg(d.weak_sig) - lg(d.weak_base);
      note(weak_rate - rr * z, "pair_rate_weak(" + tag + ")");
      note(-(lg(d.weak_sig) + eta - d.kappa - lg(d.weak_base)), "decode_hi(" + tag + ")");
      note(-(lg(d.strong_sig) - lg(d.strong_cross) - eta + d.kappa), "decode_lo(" + tag + ")");
    }
  }
  if (!frozen_) {
    for (int l = 0; l < cs_.mmw_subcarriers; ++l)
      for (int j = 0; j < cs_.num_sbs; ++j) {
        double zsum = 0.0;
        bool any = false;
        for (const auto& pv : layout_.pairs)
          if (pv.cand.subcarrier == l && pv.cand.sbs == j) {
            zsum += p.scalars[pv.z];
            any = true;
          }
        if (any)
          note(1.0 - zsum, "one_pair(l=" + std::to_string(l) + ",j=" + std::to_string(j) + ")");
      }
  }

  for (int j = 0; j < cs_.num_sbs; ++j)
    for (int iu = 0; iu < cfg_.users_per_sbs; ++iu) {
      double sum = 0.0;
      for (size_t i = 0; i < layout_.pairs.size(); ++i) {
        const auto& pv = layout_.pairs[i];
        const auto& d = decomps_[i];
        if (pv.cand.sbs != j) continue;
        if (pv.cand.strong == iu)
          sum += lg(d.strong_sig) - lg(d.strong_base);
        else if (pv.cand.is_pair() && pv.cand.weak == iu)
          sum += lg(d.weak_sig) - lg(d.weak_base);
      }
      const int partner = cfg_.dc_partner(j, iu);
      for (size_t k = 0; k < layout_.muw.size(); ++k)
        if (layout_.muw[k].mue == partner) sum += lg(muw_args_[k]);
      note(sum - cfg_.r_min, "service_floor(sue=" + std::to_string(cfg_.sue_index(j, iu)) + ")");
    }

  rep.power = 0.0;
  for (const auto& pv : layout_.pairs) {
    rep.power += p.blocks[pv.wt_strong].real().trace() / cfg_.drain_eff_sbs;
    if (pv.cand.is_pair()) rep.power += p.blocks[pv.wt_weak].real().trace() / cfg_.drain_eff_sbs;
  }
  for (const auto& mv : layout_.muw)
    rep.power += p.blocks[mv.block].real().trace() / cfg_.drain_eff_mbs;
  rep.objective = objective(p);
  rep.feasible = domain_ok && rep.worst_slack >= 0.0;
  return rep;
}

std::optional<Point> LiftedProgram::initial_point(AuditReport* last_fail) const {
  auto pts = initial_points(last_fail);
  if (pts.empty()) return std::nullopt;
  return std::move(pts.front());
}

std::vector<Point> LiftedProgram::initial_points(AuditReport* last_fail) const {
  const int n = cfg_.sbs_antennas;
  const int num_sues = cs_.num_sues;

  std::vector<char> active(layout_.pairs.size(), 0);
  if (frozen_) std::fill(active.begin(), active.end(), 1);

  // activate the k best carriers per cell; the indicator penalty pins the
  // activation chosen here, so several candidate patterns are built below
  // and the cheapest feasible one wins
  auto build_active = [&](int k_use, bool singles_only) {
    std::fill(active.begin(), active.end(), 0);
    for (int j = 0; j < cs_.num_sbs; ++j) {
      struct Pick {
        double gain;
        int l, best, count;
      };
      std::vector<Pick> picks;
      for (int l = 0; l < cs_.mmw_subcarriers; ++l) {
        Pick pk{-1.0, l, -1, 0};
        for (size_t i = 0; i < layout_.pairs.size(); ++i) {
          const auto& c = layout_.pairs[i].cand;
          if (c.subcarrier != l || c.sbs != j) continue;
          if (singles_only && c.is_pair()) continue;
          double g = hhat_[l][j * num_sues + cfg_.sue_index(j, c.strong)].real().trace();
          if (c.is_pair()) g += hhat_[l][j * num_sues + cfg_.sue_index(j, c.weak)].real().trace();
          if (g > pk.gain) {
            pk.gain = g;
            pk.best = (int)i;
          }
          ++pk.count;
        }
        if (pk.best >= 0) picks.push_back(pk);
      }
      std::sort(picks.begin(), picks.end(),
                [](const Pick& a, const Pick& b) { return a.gain > b.gain; });
      const int take = std::min<int>(k_use, (int)picks.size());
      for (int idx = 0; idx < take; ++idx) {
        int best = picks[idx].best;
        if (!layout_.pairs[best].cand.is_pair() && picks[idx].count > 1) {
          // one user per carrier: rotate users over the chosen carriers so
          // every user is served
          const int want = idx % picks[idx].count;
          int seen = 0;
          for (size_t i = 0; i < layout_.pairs.size(); ++i) {
            const auto& c = layout_.pairs[i].cand;
            if (c.subcarrier != picks[idx].l || c.sbs != j) continue;
            if (singles_only && c.is_pair()) continue;
            if (seen == want) {
              best = (int)i;
              break;
            }
            ++seen;
          }
        }
        active[best] = 1;
      }
    }
  };

  // rank carrier counts by the convex power model: k carriers at rate r cost
  // k(2^r - 1), with r forced up by the per-carrier floor; when pairing is
  // available, the one-user-per-carrier patterns are tried as well, since
  // with spare carriers they avoid the in-carrier interference entirely
  struct Pattern {
    int k = 0;
    bool singles_only = false;
  };
  std::vector<Pattern> patterns;
  if (!frozen_) {
    const int L = cs_.mmw_subcarriers;
    const bool singles = opts_.oma || cfg_.users_per_sbs == 1;
    const int kmin = singles ? std::min(cfg_.users_per_sbs, L) : 1;
    std::vector<std::pair<double, int>> scored;
    for (int k = kmin; k <= L; ++k) {
      const double share =
          singles ? cfg_.r_min * cfg_.users_per_sbs / k : cfg_.r_min / k;
      const double r = std::max(cfg_.r_min_sbs, share);
      scored.emplace_back(k * (std::exp2(r) - 1.0), k);
    }
    std::sort(scored.begin(), scored.end());
    for (const auto& [cost, k] : scored) patterns.push_back({k, false});
    if (patterns.empty()) patterns.push_back({L, false});
    if (!singles)
      for (int k = std::min(cfg_.users_per_sbs, L); k <= L; ++k)
        patterns.push_back({k, true});
  } else {
    patterns.push_back({0, false});
  }

  auto try_build = [&](int strategy, double boost) -> std::optional<Point> {
    Point p;
    p.blocks.resize(layout_.num_blocks);
    for (int h = 0; h < layout_.num_blocks; ++h)
      p.blocks[h] = Eigen::MatrixXcd::Zero(block_dims_[h], block_dims_[h]);
    p.scalars.assign(layout_.num_scalars, 0.0);

    // per-member rate target: the per-carrier floor, or the user's share of
    // the service floor when no scheduled microwave carrier can top it up
    auto mm_target = [&](int j, int iu) {
      int k_user = 0;
      for (size_t i = 0; i < layout_.pairs.size(); ++i) {
        if (!active[i]) continue;
        const auto& c = layout_.pairs[i].cand;
        if (c.sbs == j && (c.strong == iu || (c.is_pair() && c.weak == iu))) ++k_user;
      }
      const int partner = cfg_.dc_partner(j, iu);
      bool sched = false;
      for (const auto& mv : layout_.muw)
        if (mv.mue == partner) sched = true;
      double need = cfg_.r_min_sbs;
      if (!sched) need = std::max(need, cfg_.r_min / std::max(1, k_user));
      return need + 2.0 * opts_.rate_margin + boost;
    };
    // blend the weak beam between its own match (tau = 1) and the strong
    // user's direction (tau = 0, which guarantees the decode order in an
    // isolated cell); intermediate blends trade cancellation headroom for
    // array gain; each candidate keeps its own blend and slides toward the
    // aligned end whenever its decode window comes up empty
    static constexpr double kBlend[] = {1.0, 0.7, 0.4, 0.0};
    static constexpr int kBlendCount = 4;
    std::vector<int> tau_idx(layout_.pairs.size(), strategy);

    auto decode_window = [&](size_t i, double& lo, double& hi) {
      const auto& d = decomps_[i];
      const double weak_rate =
          std::log2(d.weak_sig.eval(p.blocks)) - std::log2(d.weak_base.eval(p.blocks));
      const double cross_rate =
          std::log2(d.strong_cross.eval(p.blocks)) - std::log2(d.strong_sig.eval(p.blocks));
      hi = d.kappa - opts_.sic_margin - weak_rate;
      lo = d.kappa + opts_.sic_margin - cross_rate;
    };

    for (int repair = 0;; ++repair) {
      // interference-aware power control: iterate the monotone fixed point
      // from the interference-free solution until the powers settle
      for (const auto& pv : layout_.pairs) {
        p.blocks[pv.wt_strong].setZero();
        if (pv.cand.is_pair()) p.blocks[pv.wt_weak].setZero();
      }
      double prev_total = 0.0;
      for (int round = 0; round < 60; ++round) {
        double total = 0.0;
        for (size_t i = 0; i < layout_.pairs.size(); ++i) {
          if (!active[i]) continue;
          const auto& pv = layout_.pairs[i];
          const auto& d = decomps_[i];
          const Candidate& c = pv.cand;
          const Eigen::VectorXcd& hs =
              cs_.h(c.subcarrier, c.sbs, cfg_.sue_index(c.sbs, c.strong));
          const Eigen::VectorXcd us = hs.normalized();
          const double cci_s = d.strong_base.eval(p.blocks) - 1.0;
          const double a_ss = std::norm(hs.dot(us)) / cfg_.sigma_sq_w;
          if (!(a_ss > 0.0)) return std::nullopt;
          const double theta_s = std::exp2(mm_target(c.sbs, c.strong)) - 1.0;
          const double ps = theta_s * (1.0 + cci_s) / a_ss;
          p.blocks[pv.wt_strong] = ps * (us * us.adjoint());
          total += ps;
          if (c.is_pair()) {
            const Eigen::VectorXcd& hw =
                cs_.h(c.subcarrier, c.sbs, cfg_.sue_index(c.sbs, c.weak));
            const Eigen::VectorXcd hwn = hw.normalized();
            const double tau = kBlend[tau_idx[i]];
            Eigen::VectorXcd uw = hwn;
            if (tau < 1.0) {
              const cd ip = hwn.dot(us);
              const cd align =
                  (std::abs(ip) > 1e-14) ? std::conj(ip) / std::abs(ip) : cd(1.0, 0.0);
              uw = tau * hwn + (1.0 - tau) * align * us;
              const double nn = uw.norm();
              if (nn < 1e-9) return std::nullopt;
              uw /= nn;
            }
            const double a_ww = std::norm(hw.dot(uw)) / cfg_.sigma_sq_w;
            if (!(a_ww > 0.0)) return std::nullopt;
            const double a_ws = std::norm(hw.dot(us)) / cfg_.sigma_sq_w;
            double cci_w = 0.0;
            for (const auto& [b, coeff] : d.weak_base.terms)
              if (b != pv.wt_strong) cci_w += re_inner(coeff, p.blocks[b]);
            const double theta_w = std::exp2(mm_target(c.sbs, c.weak)) - 1.0;
            const double pw = theta_w * (1.0 + cci_w + ps * a_ws) / a_ww;
            p.blocks[pv.wt_weak] = pw * (uw * uw.adjoint());
            total += pw;
          }
        }
        if (total > 4.0 * cfg_.p_max_sbs_w * cs_.num_sbs)
          return std::nullopt;  // interference-limited at these targets
        if (std::abs(total - prev_total) <= 1e-12 * std::max(1.0, total)) break;
        prev_total = total;
      }

      bool all_open = true, progressed = false;
      for (size_t i = 0; i < layout_.pairs.size(); ++i) {
        if (!active[i] || !layout_.pairs[i].cand.is_pair()) continue;
        double lo, hi;
        decode_window(i, lo, hi);
        if (lo > hi) {
          all_open = false;
          if (tau_idx[i] < kBlendCount - 1) {
            ++tau_idx[i];
            progressed = true;
          }
        }
      }
      if (all_open) break;
      if (!progressed || repair >= 8) return std::nullopt;  // order unreachable
    }

    // decode-margin slack variables
    for (size_t i = 0; i < layout_.pairs.size(); ++i) {
      const auto& pv = layout_.pairs[i];
      if (!pv.cand.is_pair()) continue;
      const auto& d = decomps_[i];
      if (!active[i]) {
        p.scalars[pv.eta] = d.kappa;
        continue;
      }
      double lo, hi;
      decode_window(i, lo, hi);
      if (lo > hi) return std::nullopt;
      p.scalars[pv.eta] = std::max(0.0, 0.5 * (lo + hi));
    }

    // microwave side: fill each user's remaining service need across its
    // scheduled subcarriers
    if (!layout_.muw.empty()) {
      auto mm_rate_of = [&](int j, int iu) {
        double sum = 0.0;
        for (size_t i = 0; i < layout_.pairs.size(); ++i) {
          if (!active[i]) continue;
          const auto& pv = layout_.pairs[i];
          const auto& d = decomps_[i];
          if (pv.cand.sbs != j) continue;
          if (pv.cand.strong == iu)
            sum += std::log2(d.strong_sig.eval(p.blocks)) -
                   std::log2(d.strong_base.eval(p.blocks));
          else if (pv.cand.is_pair() && pv.cand.weak == iu)
            sum +=
                std::log2(d.weak_sig.eval(p.blocks)) - std::log2(d.weak_base.eval(p.blocks));
        }
        return sum;
      };
      double total_muw = 0.0;
      for (int m = 0; m < cs_.num_mues; ++m) {
        std::vector<int> sched;
        for (size_t k = 0; k < layout_.muw.size(); ++k)
          if (layout_.muw[k].mue == m) sched.push_back((int)k);
        if (sched.empty()) continue;
        double need = 0.0;
        for (int j = 0; j < cs_.num_sbs; ++j)
          for (int iu = 0; iu < cfg_.users_per_sbs; ++iu)
            if (cfg_.dc_partner(j, iu) == m)
              need = std::max(need, cfg_.r_min + 2.0 * opts_.rate_margin - mm_rate_of(j, iu));
        if (need <= 0.0) continue;
        for (int k : sched) {
          const Eigen::MatrixXcd& q = muw_args_[k].terms[0].second;
          const double g = q.real().trace();
          if (!(g > 0.0)) continue;
          const double px = (std::exp2(need / (double)sched.size()) - 1.0) / g;
          p.blocks[layout_.muw[k].block] = (px / g) * q;
          total_muw += px;
        }
      }
      if (total_muw > cfg_.p_max_mbs_w) {
        const double s = 0.999 * cfg_.p_max_mbs_w / total_muw;
        for (const auto& mv : layout_.muw) p.blocks[mv.block] *= s;
      }
    }

    if (!frozen_) {
      const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
      for (size_t i = 0; i < layout_.pairs.size(); ++i) {
        const auto& pv = layout_.pairs[i];
        const double z = active[i] ? 1.0 : 0.0;
        p.scalars[pv.z] = z;
        auto member = [&](int wt, int w, int ycap, int yle, int yge) {
          p.blocks[w] = p.blocks[wt];
          p.blocks[ycap] = cfg_.p_max_sbs_w * z * id - p.blocks[wt];
          p.blocks[yle] = Eigen::MatrixXcd::Zero(n, n);
          p.blocks[yge] = (1.0 - z) * cfg_.p_max_sbs_w * id;
        };
        member(pv.wt_strong, pv.w_strong, pv.y_cap_s, pv.y_le_s, pv.y_ge_s);
        if (pv.cand.is_pair())
          member(pv.wt_weak, pv.w_weak, pv.y_cap_w, pv.y_le_w, pv.y_ge_w);
      }
    }
    return p;
  };

  // keep the cheapest feasible build per pairing style: the penalty pins the
  // activation pattern, so each kept start decides a distinct reachable basin
  // and start cost alone is not trusted to pick between them
  bool any_fail = false;
  std::optional<Point> best[2];  // [0] shared-carrier pairings, [1] singles
  double best_power[2] = {0.0, 0.0};
  for (const Pattern& pat : patterns) {
    if (!frozen_) build_active(pat.k, pat.singles_only);
    const int style = pat.singles_only ? 1 : 0;
    bool found = false;
    for (int strategy = 0; strategy < 4 && !found; ++strategy) {
      for (double boost = 0.0; boost <= 6.0; boost += 0.75) {
        auto pt = try_build(strategy, boost);
        if (!pt) break;  // structural failure; more power will not help
        const AuditReport rep = audit(*pt);
        if (std::getenv("UAVRIS_TRACE_INIT"))
          std::fprintf(stderr, "init k=%d singles=%d strat=%d boost=%.2f feas=%d power=%g worst=%s slack=%g\n",
                       pat.k, (int)pat.singles_only, strategy, boost, (int)rep.feasible,
                       rep.power, rep.worst_name.c_str(), rep.worst_slack);
        if (rep.feasible) {
          if (!best[style] || rep.power < best_power[style]) {
            best[style] = std::move(pt);
            best_power[style] = rep.power;
          }
          found = true;
          break;
        }
        if (last_fail && (!any_fail || rep.worst_slack > last_fail->worst_slack)) *last_fail = rep;
        any_fail = true;
        if (rep.worst_name.rfind("sbs_power", 0) == 0 ||
            rep.worst_name.rfind("mbs_power", 0) == 0 || rep.worst_name.rfind("psd", 0) == 0)
          break;  // already over budget; raising targets only makes it worse
      }
    }
  }
  std::vector<Point> out;
  if (best[0] && best[1]) {
    const int first = best_power[1] < best_power[0] ? 1 : 0;
    out.push_back(std::move(*best[first]));
    out.push_back(std::move(*best[1 - first]));
  } else if (best[0]) {
    out.push_back(std::move(*best[0]));
  } else if (best[1]) {
    out.push_back(std::move(*best[1]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// vector-form re-check
// ---------------------------------------------------------------------------

AuditReport audit_vector_solution(const ChannelSet& cs,
                                  const std::vector<PhaseShiftMatrix>& phases,
                                  const BeamformerSet& beams, const AllocationSet& alloc,
                                  const NetworkConfig& cfg, double tol) {
  AuditReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  auto note = [&](double slack, const std::string& name) {
    if (slack < rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_name = name;
    }
  };

  for (int j = 0; j < cs.num_sbs; ++j) {
    double pw = 0.0;
    for (int l = 0; l < cs.mmw_subcarriers; ++l)
      for (const auto& b : beams.mmw[l][j]) pw += b.w.squaredNorm();
    note((cfg.p_max_sbs_w - pw) / cfg.p_max_sbs_w, "sbs_power(j=" + std::to_string(j) + ")");
  }
  {
    double pm = 0.0;
    for (int x = 0; x < cs.muw_subcarriers; ++x)
      for (const auto& b : beams.muw[x]) pm += b.w.squaredNorm();
    note((cfg.p_max_mbs_w - pm) / cfg.p_max_mbs_w, "mbs_power");
  }
  for (int x = 0; x < cs.muw_subcarriers; ++x) {
    int sched = 0;
    for (int m = 0; m < cs.num_mues; ++m) {
      const int v = alloc.rho[x][m];
      if (v != 0 && v != 1) note(-1.0, "muw_schedule_binary(x=" + std::to_string(x) + ")");
      sched += v;
    }
    note(1.0 - (double)sched, "muw_schedule(x=" + std::to_string(x) + ")");
  }

  // per-user achieved service rates in vector form
  std::vector<double> mm_rate(cfg.num_sues(), 0.0);
  for (int l = 0; l < cs.mmw_subcarriers; ++l)
    for (int j = 0; j < cs.num_sbs; ++j) {
      const auto& pr = alloc.pair[l][j];
      const std::string tag = "(l=" + std::to_string(l) + ",j=" + std::to_string(j) + ")";
      if (!pr.active()) {
        if (!beams.mmw[l][j].empty()) note(-1.0, "orphan_beams" + tag);
        continue;
      }
      for (const auto& b : beams.mmw[l][j])
        if (b.user != pr.strong && b.user != pr.weak) note(-1.0, "orphan_beams" + tag);
      if (pr.is_pair()) {
        if (!beams.find_mmw(l, j, pr.strong) || !beams.find_mmw(l, j, pr.weak)) {
          note(-1.0, "missing_beam" + tag);
          continue;
        }
        const auto [rs, rw] =
            rates::mmw_rate_pair(cs, beams, alloc, cfg, j, pr.strong, pr.weak, l);
        mm_rate[cfg.sue_index(j, pr.strong)] += rs;
        mm_rate[cfg.sue_index(j, pr.weak)] += rw;
        note(rs - cfg.r_min_sbs, "pair_rate_strong" + tag);
        note(rw - cfg.r_min_sbs, "pair_rate_weak" + tag);
        note(-rates::sic_gap(cs, beams, cfg, j, pr.strong, pr.weak, l), "decode_order" + tag);
      } else {
        if (!beams.find_mmw(l, j, pr.strong)) {
          note(-1.0, "missing_beam" + tag);
          continue;
        }
        const double r = rates::mmw_rate_single(cs, beams, alloc, cfg, j, pr.strong, l);
        mm_rate[cfg.sue_index(j, pr.strong)] += r;
        note(r - cfg.r_min_sbs, "single_rate" + tag);
      }
    }
  std::vector<double> mue_rate(cs.num_mues, 0.0);
  for (int m = 0; m < cs.num_mues; ++m)
    for (int x = 0; x < cs.muw_subcarriers; ++x)
      mue_rate[m] += rates::muw_rate(cs, phases, beams, alloc, cfg, m, x);
  for (int j = 0; j < cs.num_sbs; ++j)
    for (int iu = 0; iu < cfg.users_per_sbs; ++iu) {
      const int s = cfg.sue_index(j, iu);
      note(mm_rate[s] + mue_rate[cfg.dc_partner(j, iu)] - cfg.r_min,
           "service_floor(sue=" + std::to_string(s) + ")");
    }

  rep.power = rates::total_power(beams, cfg);
  rep.objective = rep.power;
  rep.feasible = rep.worst_slack >= -tol;
  return rep;
}

// ---------------------------------------------------------------------------
// randomized rank-one recovery
// ---------------------------------------------------------------------------

RandomizedBeam gaussian_randomization(
    const Eigen::MatrixXcd& lift, int num_samples,
    const std::function<std::optional<double>(const Eigen::VectorXcd&)>& min_power, Rng& rng) {
  const auto r1 = sdp::check_rank_one(lift, 1e-6);
  const int n = (int)lift.rows();
  std::vector<Eigen::VectorXcd> dirs;
  if (r1.principal.norm() > 0.0) dirs.push_back(r1.principal.normalized());
  if (!r1.is_rank_one && num_samples > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (lift + lift.adjoint()));
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    for (int s = 0; s < num_samples; ++s) {
      Eigen::VectorXcd xi(n);
      for (int i = 0; i < n; ++i) xi(i) = rng.cgauss();
      Eigen::VectorXcd draw = es.eigenvectors() * lam.asDiagonal() * xi;
      const double nrm = draw.norm();
      if (nrm > 0.0) dirs.push_back(draw / nrm);
    }
  }
  RandomizedBeam best;
  double best_power = std::numeric_limits<double>::infinity();
  for (const auto& u : dirs) {
    const auto p = min_power(u);
    if (p && *p >= 0.0 && *p < best_power) {
      best_power = *p;
      best.w = std::sqrt(*p) * u;
      best.feasible = true;
    }
  }
  if (!best.feasible) best.w = r1.principal;
  return best;
}

// ---------------------------------------------------------------------------
// outer loop
// ---------------------------------------------------------------------------

namespace {

struct ScaRun {
  bool converged = false;
  int steps = 0;
  std::vector<std::string> inner_statuses;
};

ScaRun run_sca(const LiftedProgram& prog, Point& x, std::vector<double>& hist, int iters,
               const ScaOptions& opts) {
  ScaRun out;
  if (hist.empty()) hist.push_back(prog.objective(x));
  for (int it = 0; it < iters; ++it) {
    sdp::SdpProblem p4 = prog.assemble(x);
    sdp::SolveOptions so;
    so.tol = opts.sdp_tol;
    so.max_iter = opts.sdp_budget;
    so.warm_blocks = x.blocks;
    so.warm_scalars = x.scalars;
    const sdp::SdpSolution inner = sdp::solve(p4, so);
    ++out.steps;
    out.inner_statuses.push_back(sdp::to_string(inner.status));
    if (inner.blocks.empty() || inner.status == sdp::SolveStatus::infeasible) {
      out.converged = true;  // keep the current (feasible) point
      return out;
    }
    const Point xp{inner.blocks, inner.scalars};
    bool accepted = false;
    double t = 1.0;
    for (int k = 0; k <= 12; ++k, t *= 0.5) {
      Point xt = lerp(x, xp, t);
      const AuditReport a = prog.audit(xt);
      if (a.feasible && a.objective < hist.back() - 1e-12) {
        x = std::move(xt);
        hist.push_back(a.objective);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;  // no feasible descent along the step: stationary
      return out;
    }
    const double prev = hist[hist.size() - 2];
    if (prev - hist.back() <= opts.rel_tol * std::max(1.0, std::abs(prev))) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace

BeamformingSolution sca_solve(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                              const std::vector<std::vector<int>>& rho,
                              const NetworkConfig& cfg, const ScaOptions& opts) {
  const LiftedProgram prog(cs, phases, rho, cfg, opts);
  std::vector<Candidate> cand_list;
  for (const auto& pv : prog.layout().pairs) cand_list.push_back(pv.cand);

  AuditReport start_fail;
  auto starts = prog.initial_points(&start_fail);
  if (starts.empty()) {
    BeamformingSolution sol;
    sol.candidates = cand_list;
    sol.status = ScaStatus::infeasible;
    nlohmann::json dg;
    dg["status"] = to_string(sol.status);
    dg["reason"] = "no feasible starting point";
    dg["closest_start"] = {{"worst_name", start_fail.worst_name},
                           {"worst_slack", start_fail.worst_slack}};
    dg["objective_history"] = sol.objective_history;
    sol.diagnostics = dg.dump();
    return sol;
  }

  // each kept start decides a pairing basin that the indicator penalty then
  // pins, and the cost early in the descent says little about the polished
  // cost, so the full round-and-polish pipeline runs from every start and
  // the cheapest audited result wins
  struct Attempt {
    BeamformingSolution sol;
    nlohmann::json dg;
  };
  auto attempt = [&](Point x) -> Attempt {
    Attempt at;
    BeamformingSolution& sol = at.sol;
    nlohmann::json& dg = at.dg;
    sol.candidates = cand_list;
    auto mark_infeasible = [&](const std::string& why) {
      sol.status = ScaStatus::infeasible;
      dg["status"] = to_string(sol.status);
      dg["reason"] = why;
      dg["objective_history"] = sol.objective_history;
    };

    const ScaRun main_run = run_sca(prog, x, sol.objective_history, opts.max_outer, opts);
    sol.iterations = main_run.steps;
    dg["main_sdp"] = main_run.inner_statuses;

    // indicator rounding with per-(subcarrier, cell) repair
    const auto& pairs = prog.layout().pairs;
    sol.z_relaxed.resize(pairs.size());
    sol.z_rounded.assign(pairs.size(), 0.0);
    for (size_t i = 0; i < pairs.size(); ++i) sol.z_relaxed[i] = x.scalars[pairs[i].z];
    for (int l = 0; l < cs.mmw_subcarriers; ++l)
      for (int j = 0; j < cs.num_sbs; ++j) {
        int best = -1;
        double best_gain = -1.0;
        for (size_t i = 0; i < pairs.size(); ++i) {
          const auto& c = pairs[i].cand;
          if (c.subcarrier != l || c.sbs != j || sol.z_relaxed[i] < 0.5) continue;
          double g = x.blocks[pairs[i].wt_strong].real().trace();
          if (c.is_pair()) g += x.blocks[pairs[i].wt_weak].real().trace();
          if (g > best_gain) {
            best_gain = g;
            best = (int)i;
          }
        }
        if (best >= 0) sol.z_rounded[best] = 1.0;
      }

    sol.gating_zero_residual = 0.0;
    sol.gating_one_residual = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      auto member = [&](int wt, int w) {
        if (sol.z_rounded[i] == 0.0) {
          sol.gating_zero_residual = std::max(
              sol.gating_zero_residual, x.blocks[wt].norm() / cfg.p_max_sbs_w);
        } else {
          sol.gating_one_residual =
              std::max(sol.gating_one_residual,
                       (x.blocks[wt] - x.blocks[w]).norm() / (1.0 + x.blocks[w].norm()));
        }
      };
      member(pairs[i].wt_strong, pairs[i].w_strong);
      if (pairs[i].cand.is_pair()) member(pairs[i].wt_weak, pairs[i].w_weak);
    }

    std::vector<Candidate> chosen;
    for (size_t i = 0; i < pairs.size(); ++i)
      if (sol.z_rounded[i] == 1.0) chosen.push_back(pairs[i].cand);
    dg["z_relaxed"] = sol.z_relaxed;
    dg["z_rounded"] = sol.z_rounded;
    dg["iterations"] = sol.iterations;

    // frozen-allocation polish, restarting from scratch if the rounded point
    // does not survive the exact audit
    std::vector<double> polish_hist;
    Point fx;
    bool pconv = false;
    for (int attempt = 0; attempt < 2; ++attempt) {
      LiftedProgram pol(cs, phases, rho, cfg, opts, chosen);
      fx.blocks.assign(pol.layout().num_blocks, Eigen::MatrixXcd());
      fx.scalars.assign(pol.layout().num_scalars, 0.0);
      for (size_t k = 0; k < pol.layout().pairs.size(); ++k) {
        const auto& dst = pol.layout().pairs[k];
        for (const auto& src : pairs) {
          const auto& a = src.cand;
          const auto& b = dst.cand;
          if (a.sbs != b.sbs || a.subcarrier != b.subcarrier || a.strong != b.strong ||
              a.weak != b.weak)
            continue;
          fx.blocks[dst.wt_strong] = x.blocks[src.wt_strong];
          if (b.is_pair()) {
            fx.blocks[dst.wt_weak] = x.blocks[src.wt_weak];
            fx.scalars[dst.eta] = x.scalars[src.eta];
          }
          break;
        }
      }
      for (size_t k = 0; k < pol.layout().muw.size(); ++k)
        fx.blocks[pol.layout().muw[k].block] = x.blocks[prog.layout().muw[k].block];

      bool have = pol.audit(fx).feasible;
      if (!have) {
        auto alt = pol.initial_point();
        if (alt) {
          fx = *alt;
          have = true;
        }
      }
      if (have) {
        polish_hist.clear();
        const ScaRun pr = run_sca(pol, fx, polish_hist, opts.repolish_outer, opts);
        pconv = pr.converged;
        sol.iterations += pr.steps;
        dg["polish_sdp"] = pr.inner_statuses;

        // rank-one recovery of every active lift
        Rng rng(derive_seed(opts.seed, 0x5ca1ab1eULL));
        BeamformerSet beams =
            BeamformerSet::empty(cs.mmw_subcarriers, cs.num_sbs, cs.muw_subcarriers);
        AllocationSet alloc =
            AllocationSet::empty(cs.mmw_subcarriers, cs.num_sbs, cs.muw_subcarriers, cs.num_mues);
        alloc.rho = rho;
        for (const auto& c : chosen) alloc.pair[c.subcarrier][c.sbs] = {c.strong, c.weak};

        struct Slot {
          bool is_muw = false;
          int l = 0, j = 0, user = 0, x = 0, mue = 0, handle = -1;
        };
        std::vector<Slot> slots;
        for (const auto& pv : pol.layout().pairs) {
          slots.push_back({false, pv.cand.subcarrier, pv.cand.sbs, pv.cand.strong, 0, 0,
                           pv.wt_strong});
          if (pv.cand.is_pair())
            slots.push_back({false, pv.cand.subcarrier, pv.cand.sbs, pv.cand.weak, 0, 0,
                             pv.wt_weak});
        }
        for (const auto& mv : pol.layout().muw)
          slots.push_back({true, 0, 0, 0, mv.x, mv.mue, mv.block});

        sol.rank_ratios.clear();
        std::vector<bool> needs_draws(slots.size(), false);
        for (size_t s = 0; s < slots.size(); ++s) {
          const auto& lift = fx.blocks[slots[s].handle];
          const auto r1 = sdp::check_rank_one(lift, 1e-6);
          sol.rank_ratios.push_back(r1.ratio);
          needs_draws[s] = !r1.is_rank_one;
          if (slots[s].is_muw)
            beams.muw[slots[s].x].push_back({slots[s].mue, r1.principal});
          else
            beams.mmw[slots[s].l][slots[s].j].push_back({slots[s].user, r1.principal});
        }
        auto beam_ref = [&](const Slot& sl) -> Eigen::VectorXcd& {
          if (sl.is_muw) {
            for (auto& b : beams.muw[sl.x])
              if (b.mue == sl.mue) return b.w;
          } else {
            for (auto& b : beams.mmw[sl.l][sl.j])
              if (b.user == sl.user) return b.w;
          }
          throw ValidationError("recovered beam slot not found");
        };
        for (size_t s = 0; s < slots.size(); ++s) {
          if (!needs_draws[s]) continue;
          const auto& lift = fx.blocks[slots[s].handle];
          const double base = std::max(lift.real().trace(), 1e-12);
          const double cap = slots[s].is_muw ? cfg.p_max_mbs_w : cfg.p_max_sbs_w;
          Eigen::VectorXcd& target = beam_ref(slots[s]);
          const Eigen::VectorXcd saved = target;
          // the lift's own trace is the natural power estimate, so scan a
          // multiplier ladder that is fine right around it
          static constexpr double kLadder[] = {0.25,   0.5,   0.7,  0.85, 0.95, 0.99,
                                               1.0,    1.0001, 1.0003, 1.001, 1.003, 1.01,
                                               1.03,   1.1,   1.3,  2.0,  4.0,  8.0};
          auto min_power = [&](const Eigen::VectorXcd& u) -> std::optional<double> {
            for (double mul : kLadder) {
              const double p = std::min(mul * base, cap);
              target = std::sqrt(p) * u;
              if (audit_vector_solution(cs, phases, beams, alloc, cfg, 1e-9).feasible) return p;
            }
            target = std::sqrt(cap) * u;
            if (audit_vector_solution(cs, phases, beams, alloc, cfg, 1e-9).feasible) return cap;
            return std::nullopt;
          };
          const RandomizedBeam rb =
              gaussian_randomization(lift, opts.randomization_samples, min_power, rng);
          target = rb.feasible ? rb.w : saved;
        }

        AuditReport va = audit_vector_solution(cs, phases, beams, alloc, cfg, 1e-6);
        if (!va.feasible) {
          // per-slot rescue can wedge when several extracted beams are all a
          // hair short; a uniform power raise restores every rate together
          for (double up : {1.0002, 1.0005, 1.001, 1.002, 1.005, 1.01, 1.02, 1.05, 1.1, 1.2, 1.5}) {
            BeamformerSet trial = beams;
            bool capped = false;
            const double s = std::sqrt(up);
            for (auto& per_l : trial.mmw)
              for (auto& cell : per_l)
                for (auto& b : cell) b.w *= s;
            for (auto& per_x : trial.muw)
              for (auto& b : per_x) b.w *= s;
            for (int j = 0; j < cs.num_sbs && !capped; ++j) {
              double pw = 0.0;
              for (int l = 0; l < cs.mmw_subcarriers; ++l)
                for (const auto& b : trial.mmw[l][j]) pw += b.w.squaredNorm();
              capped = pw > cfg.p_max_sbs_w;
            }
            double pm = 0.0;
            for (const auto& per_x : trial.muw)
              for (const auto& b : per_x) pm += b.w.squaredNorm();
            if (capped || pm > cfg.p_max_mbs_w) break;
            const AuditReport ta = audit_vector_solution(cs, phases, trial, alloc, cfg, 1e-6);
            if (ta.feasible) {
              beams = trial;
              va = ta;
              break;
            }
          }
        }
        sol.beams = beams;
        sol.alloc = alloc;
        sol.p_total_w = rates::total_power(beams, cfg);
        sol.sue_rates.assign(cfg.num_sues(), 0.0);
        sol.mue_rates.assign(cs.num_mues, 0.0);
        for (int m = 0; m < cs.num_mues; ++m)
          for (int xx = 0; xx < cs.muw_subcarriers; ++xx)
            sol.mue_rates[m] += rates::muw_rate(cs, phases, beams, alloc, cfg, m, xx);
        for (int l = 0; l < cs.mmw_subcarriers; ++l)
          for (int j = 0; j < cs.num_sbs; ++j) {
            const auto& pr = alloc.pair[l][j];
            if (!pr.active()) continue;
            if (pr.is_pair()) {
              const auto [rs, rw] =
                  rates::mmw_rate_pair(cs, beams, alloc, cfg, j, pr.strong, pr.weak, l);
              sol.sue_rates[cfg.sue_index(j, pr.strong)] += rs;
              sol.sue_rates[cfg.sue_index(j, pr.weak)] += rw;
            } else {
              sol.sue_rates[cfg.sue_index(j, pr.strong)] +=
                  rates::mmw_rate_single(cs, beams, alloc, cfg, j, pr.strong, l);
            }
          }
        for (int j = 0; j < cs.num_sbs; ++j)
          for (int iu = 0; iu < cfg.users_per_sbs; ++iu)
            sol.sue_rates[cfg.sue_index(j, iu)] += sol.mue_rates[cfg.dc_partner(j, iu)];

        sol.status = va.feasible
                         ? ((main_run.converged && pconv) ? ScaStatus::optimal : ScaStatus::max_iter)
                         : ScaStatus::infeasible;
        dg["status"] = to_string(sol.status);
        dg["objective_history"] = sol.objective_history;
        dg["polish_history"] = polish_hist;
        dg["rank_ratios"] = sol.rank_ratios;
        dg["gating_zero_residual"] = sol.gating_zero_residual;
        dg["gating_one_residual"] = sol.gating_one_residual;
        dg["p_total_w"] = sol.p_total_w;
        dg["sue_rates"] = sol.sue_rates;
        dg["mue_rates"] = sol.mue_rates;
        dg["final_audit"] = {{"feasible", va.feasible},
                             {"worst_slack", va.worst_slack},
                             {"worst_name", va.worst_name}};
        return at;
      }

      // the rounded allocation lost feasibility: activate the best candidate in
      // every empty (subcarrier, cell) slot and retry once
      bool augmented = false;
      for (int l = 0; l < cs.mmw_subcarriers; ++l)
        for (int j = 0; j < cs.num_sbs; ++j) {
          bool covered = false;
          for (const auto& c : chosen)
            if (c.subcarrier == l && c.sbs == j) covered = true;
          if (covered) continue;
          int best = -1;
          double best_gain = -1.0;
          for (size_t i = 0; i < pairs.size(); ++i) {
            const auto& c = pairs[i].cand;
            if (c.subcarrier != l || c.sbs != j) continue;
            const double g = sol.z_relaxed[i];
            if (g > best_gain) {
              best_gain = g;
              best = (int)i;
            }
          }
          if (best >= 0) {
            chosen.push_back(pairs[best].cand);
            sol.z_rounded[best] = 1.0;
            augmented = true;
          }
        }
      if (!augmented) break;
    }
    mark_infeasible("rounded allocation admits no feasible polish point");
    return at;
  };

  Attempt best = attempt(std::move(starts[0]));
  nlohmann::json alternates = nlohmann::json::array();
  for (size_t si = 1; si < starts.size(); ++si) {
    Attempt trial = attempt(std::move(starts[si]));
    const bool trial_ok = trial.sol.status != ScaStatus::infeasible;
    const bool best_ok = best.sol.status != ScaStatus::infeasible;
    const bool take =
        trial_ok != best_ok ? trial_ok : (trial_ok && trial.sol.p_total_w < best.sol.p_total_w);
    Attempt& loser = take ? best : trial;
    loser.dg["status"] = to_string(loser.sol.status);
    loser.dg["p_total_w"] = loser.sol.p_total_w;
    alternates.push_back(std::move(loser.dg));
    if (take) best = std::move(trial);
  }
  if (!alternates.empty()) best.dg["alternate_starts"] = alternates;
  best.sol.diagnostics = best.dg.dump();
  return best.sol;
}

}  // namespace uavris::sca

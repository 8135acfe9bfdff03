#include "uavris/sdp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace uavris::sdp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "?";
}

LinearExpr& LinearExpr::add(int block, Eigen::MatrixXcd coeff) {
  terms.push_back({block, std::move(coeff)});
  return *this;
}

LinearExpr& LinearExpr::add_scalar(int idx, double coeff) {
  scalars.emplace_back(idx, coeff);
  return *this;
}

int SdpProblem::add_block(int dim) {
  block_dims.push_back(dim);
  return (int)block_dims.size() - 1;
}

int SdpProblem::add_scalar() { return num_scalars++; }

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

double re_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.array() * b.array().conjugate()).sum().real();
}

// Re tr(a * b) without forming the product.
double re_trace_prod(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

void check_expr(const SdpProblem& p, const LinearExpr& e, const char* what) {
  for (const auto& t : e.terms) {
    if (t.block < 0 || t.block >= (int)p.block_dims.size())
      throw ValidationError(std::string(what) + ": block index out of range");
    const int d = p.block_dims[t.block];
    if (t.coeff.rows() != d || t.coeff.cols() != d)
      throw ValidationError(std::string(what) + ": coefficient shape mismatch");
    const double scale = 1.0 + t.coeff.cwiseAbs().maxCoeff();
    if ((t.coeff - t.coeff.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw ValidationError(std::string(what) + ": coefficient not Hermitian");
    if (!t.coeff.allFinite())
      throw ValidationError(std::string(what) + ": non-finite coefficient");
  }
  for (const auto& [idx, c] : e.scalars) {
    if (idx < 0 || idx >= p.num_scalars)
      throw ValidationError(std::string(what) + ": scalar index out of range");
    if (!std::isfinite(c)) throw ValidationError(std::string(what) + ": non-finite coefficient");
  }
}

}  // namespace

void SdpProblem::validate() const {
  for (int d : block_dims)
    if (d < 1) throw ValidationError("sdp: block dimension must be >= 1");
  check_expr(*this, objective, "sdp objective");
  if (!std::isfinite(objective_constant)) throw ValidationError("sdp: bad objective constant");
  for (const auto& c : constraints) {
    check_expr(*this, c.expr, "sdp constraint");
    if (c.expr.terms.empty() && c.expr.scalars.empty())
      throw ValidationError("sdp: constraint without variables");
    if (!std::isfinite(c.bound)) throw ValidationError("sdp: non-finite bound");
  }
}

double SdpProblem::eval(const LinearExpr& e, const std::vector<Eigen::MatrixXcd>& blocks,
                        const std::vector<double>& scalars) const {
  double v = 0.0;
  for (const auto& t : e.terms) v += re_inner(t.coeff, blocks.at(t.block));
  for (const auto& [idx, c] : e.scalars) v += c * scalars.at(idx);
  return v;
}

void SdpProblem::dump(std::ostream& out) const {
  out.precision(17);
  out << "sdp-problem v1\n";
  out << "blocks";
  for (int d : block_dims) out << ' ' << d;
  out << "\nscalars " << num_scalars << "\n";
  auto put_expr = [&](const LinearExpr& e) {
    out << "  mats " << e.terms.size() << '\n';
    for (const auto& t : e.terms) {
      out << "  block " << t.block << '\n';
      for (int r = 0; r < t.coeff.rows(); ++r) {
        out << "   ";
        for (int c = 0; c < t.coeff.cols(); ++c)
          out << ' ' << t.coeff(r, c).real() << ' ' << t.coeff(r, c).imag();
        out << '\n';
      }
    }
    out << "  scals " << e.scalars.size() << '\n';
    for (const auto& [i, c] : e.scalars) out << "   " << i << ' ' << c << '\n';
  };
  out << "objective constant " << objective_constant << '\n';
  put_expr(objective);
  out << "constraints " << constraints.size() << '\n';
  for (const auto& c : constraints) {
    const char* rel = c.rel == Relation::le ? "<=" : (c.rel == Relation::eq ? "==" : ">=");
    out << "constraint " << rel << ' ' << c.bound << " # " << c.name << '\n';
    put_expr(c.expr);
  }
}

// ---------------------------------------------------------------------------
// solver internals

namespace {

struct Row {
  std::vector<std::pair<int, Eigen::MatrixXcd>> mats;
  std::vector<std::pair<int, double>> scals;
  double b = 0.0;
};

struct Standardized {
  std::vector<int> dims;
  int n_scal = 0;  // original scalars + slacks
  int orig_scalars = 0;
  std::vector<Row> rows;
  std::vector<Eigen::MatrixXcd> cmat;  // objective per block (scaled)
  Eigen::VectorXd cscal;               // objective on scalars (scaled)
  double cscale = 1.0;
  double obj_const = 0.0;
  double bnorm = 0.0;
};

Standardized standardize(const SdpProblem& p) {
  Standardized st;
  st.dims = p.block_dims;
  st.orig_scalars = p.num_scalars;
  st.n_scal = p.num_scalars;
  const int nb = (int)st.dims.size();

  auto merged = [&](const LinearExpr& e) {
    std::map<int, Eigen::MatrixXcd> mats;
    std::map<int, double> scals;
    for (const auto& t : e.terms) {
      Eigen::MatrixXcd h = 0.5 * (t.coeff + t.coeff.adjoint());
      auto it = mats.find(t.block);
      if (it == mats.end())
        mats.emplace(t.block, std::move(h));
      else
        it->second += h;
    }
    for (const auto& [i, c] : e.scalars) scals[i] += c;
    return std::make_pair(std::move(mats), std::move(scals));
  };

  // objective, scaled to unit infinity norm
  st.cmat.assign(nb, Eigen::MatrixXcd());
  st.cscal = Eigen::VectorXd::Zero(p.num_scalars);
  auto [om, os] = merged(p.objective);
  double cmax = 0.0;
  for (auto& [b, m] : om) cmax = std::max(cmax, m.cwiseAbs().maxCoeff());
  for (auto& [i, c] : os) cmax = std::max(cmax, std::abs(c));
  st.cscale = std::max(1e-12, cmax);
  for (auto& [b, m] : om) st.cmat[b] = m / st.cscale;
  for (auto& [i, c] : os) st.cscal[i] = c / st.cscale;
  st.obj_const = p.objective_constant;

  for (const auto& con : p.constraints) {
    auto [cm, cs] = merged(con.expr);
    double nrm2 = 0.0;
    for (auto& [b, m] : cm) nrm2 += m.squaredNorm();
    for (auto& [i, c] : cs) nrm2 += c * c;
    const double scale = 1.0 / std::max(std::sqrt(nrm2), 1e-12);
    Row row;
    for (auto& [b, m] : cm) row.mats.emplace_back(b, m * scale);
    for (auto& [i, c] : cs) row.scals.emplace_back(i, c * scale);
    row.b = con.bound * scale;
    if (con.rel == Relation::le) {
      row.scals.emplace_back(st.n_scal++, 1.0);
    } else if (con.rel == Relation::ge) {
      row.scals.emplace_back(st.n_scal++, -1.0);
    }
    st.bnorm = std::max(st.bnorm, std::abs(row.b));
    st.rows.push_back(std::move(row));
  }
  return st;
}

/// Infeasible-start predictor-corrector on the self-dual cone of PSD blocks
/// and nonnegative scalars. Maintains a strictly interior primal-dual pair;
/// the Schur complement uses the dual scaling, which keeps its conditioning
/// proportional to 1/mu rather than 1/mu^2.
class PdSolver {
 public:
  explicit PdSolver(const Standardized& st) : st_(st) {
    const int nb = (int)st.dims.size();
    const int m = (int)st.rows.size();
    block_rows_.resize(nb);
    scal_rows_.resize(st.n_scal);
    for (int k = 0; k < m; ++k) {
      for (size_t ti = 0; ti < st.rows[k].mats.size(); ++ti)
        block_rows_[st.rows[k].mats[ti].first].emplace_back(k, (int)ti);
      for (const auto& [i, c] : st.rows[k].scals) scal_rows_[i].emplace_back(k, c);
    }
    deg_ = st.n_scal;
    for (int d : st.dims) deg_ += d;
    bvec_.resize(m);
    for (int k = 0; k < m; ++k) bvec_[k] = st.rows[k].b;
  }

  std::vector<Eigen::MatrixXcd> X, S;
  Eigen::VectorXd s, z, y;

  struct Result {
    bool converged = false;
    bool infeasible = false;
    bool stalled = false;
    int iterations = 0;
  };

  void start_dual_interior(double rho_d) {
    S.clear();
    for (int d : st_.dims) S.push_back(rho_d * Eigen::MatrixXcd::Identity(d, d));
    z = Eigen::VectorXd::Constant(st_.n_scal, rho_d);
    y = Eigen::VectorXd::Zero((int)st_.rows.size());
  }

  double scalar_cost(int i) const { return i < st_.orig_scalars ? st_.cscal[i] : 0.0; }

  double complementarity() const {
    double v = s.dot(z);
    for (size_t b = 0; b < X.size(); ++b) v += re_inner(X[b], S[b]);
    return v;
  }

  double primal_scaled() const {
    double v = 0.0;
    for (size_t b = 0; b < X.size(); ++b)
      if (st_.cmat[b].size()) v += re_inner(st_.cmat[b], X[b]);
    for (int i = 0; i < st_.orig_scalars; ++i) v += st_.cscal[i] * s[i];
    return v;
  }

  Result run(double tol, int budget, std::vector<IterateRecord>& log) {
    Result res;
    const int m = (int)st_.rows.size();
    const int nb = (int)st_.dims.size();
    const double inf = std::numeric_limits<double>::infinity();
    int short_steps = 0;

    for (int iter = 0; iter < budget; ++iter) {
      res.iterations = iter + 1;

      // residuals at the current point
      Eigen::VectorXd rp(m);  // b - A(x)
      for (int k = 0; k < m; ++k) {
        const Row& row = st_.rows[k];
        double v = 0.0;
        for (const auto& [b, a] : row.mats) v += re_inner(a, X[b]);
        for (const auto& [i, c] : row.scals) v += c * s[i];
        rp[k] = row.b - v;
      }
      std::vector<Eigen::MatrixXcd> Rd(nb);
      double rd_abs = 0.0;
      for (int b = 0; b < nb; ++b) {
        Rd[b] = st_.cmat[b].size() ? Eigen::MatrixXcd(st_.cmat[b])
                                   : Eigen::MatrixXcd::Zero(st_.dims[b], st_.dims[b]);
        for (const auto& [k, ti] : block_rows_[b]) Rd[b] -= y[k] * st_.rows[k].mats[ti].second;
        Rd[b] -= S[b];
        rd_abs = std::max(rd_abs, Rd[b].cwiseAbs().maxCoeff());
      }
      Eigen::VectorXd rdz(st_.n_scal);
      for (int i = 0; i < st_.n_scal; ++i) {
        double v = scalar_cost(i);
        for (const auto& [k, c] : scal_rows_[i]) v -= y[k] * c;
        rdz[i] = v - z[i];
        rd_abs = std::max(rd_abs, std::abs(rdz[i]));
      }

      const double comp = complementarity();
      const double mu = comp / deg_;
      const double p_nat = primal_scaled() * st_.cscale + st_.obj_const;
      const double gap_nat = comp * st_.cscale;
      log.push_back({p_nat, p_nat - gap_nat, gap_nat});

      const double gap_rel = gap_nat / (1.0 + std::abs(p_nat) + std::abs(p_nat - gap_nat));
      const double rp_rel = inf_norm(rp) / (1.0 + st_.bnorm);
      const double rd_rel = rd_abs / 2.0;  // objective is scaled to unit norm
      if (gap_rel <= tol && rp_rel <= 1e-9 && rd_rel <= 1e-9) {
        res.converged = true;
        return res;
      }

      // factor both cone points
      std::vector<Eigen::LLT<Eigen::MatrixXcd>> lx(nb), ls(nb);
      std::vector<Eigen::MatrixXcd> Sinv(nb);
      bool fail = false;
      for (int b = 0; b < nb && !fail; ++b) {
        lx[b].compute(X[b]);
        ls[b].compute(S[b]);
        if (lx[b].info() != Eigen::Success || ls[b].info() != Eigen::Success) fail = true;
        if (!fail)
          Sinv[b] = ls[b].solve(Eigen::MatrixXcd::Identity(st_.dims[b], st_.dims[b]));
      }
      if (fail) {
        res.stalled = true;
        return res;
      }

      // Schur complement M_kl = Re tr(A_k Sinv A_l X) + sum_i a_ki a_li s_i/z_i
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
      for (int b = 0; b < nb; ++b) {
        const auto& adj = block_rows_[b];
        if (adj.empty()) continue;
        std::vector<Eigen::MatrixXcd> P(adj.size());
        for (size_t i = 0; i < adj.size(); ++i) {
          const auto& a = st_.rows[adj[i].first].mats[adj[i].second].second;
          P[i] = Sinv[b] * a * X[b];
        }
        for (size_t i = 0; i < adj.size(); ++i) {
          const auto& ak = st_.rows[adj[i].first].mats[adj[i].second].second;
          for (size_t j = 0; j < adj.size(); ++j)
            M(adj[i].first, adj[j].first) += re_trace_prod(ak, P[j]);
        }
      }
      for (int i = 0; i < st_.n_scal; ++i) {
        const double w = s[i] / z[i];
        const auto& adj = scal_rows_[i];
        for (size_t a = 0; a < adj.size(); ++a)
          for (size_t c = 0; c < adj.size(); ++c)
            M(adj[a].first, adj[c].first) += adj[a].second * adj[c].second * w;
      }
      M = (0.5 * (M + M.transpose())).eval();

      Eigen::LLT<Eigen::MatrixXd> mllt(M);
      Eigen::LDLT<Eigen::MatrixXd> mldlt;
      const bool spd = mllt.info() == Eigen::Success;
      if (!spd) {
        Eigen::MatrixXd mr = M;
        const double reg = 1e-12 * (m ? std::max(1.0, M.diagonal().maxCoeff()) : 1.0);
        mr.diagonal().array() += reg;
        mldlt.compute(mr);
      }
      auto back_solve = [&](const Eigen::VectorXd& r) {
        return spd ? mllt.solve(r).eval() : mldlt.solve(r).eval();
      };
      auto schur_solve = [&](const Eigen::VectorXd& rhs) {
        Eigen::VectorXd v = back_solve(rhs);
        double prev = inf;
        for (int pass = 0; pass < 8; ++pass) {
          const Eigen::VectorXd r = rhs - M * v;
          const double rn = inf_norm(r);
          if (!(rn < prev) || rn <= 1e-15 * std::max(1.0, inf_norm(rhs))) break;
          prev = rn;
          v += back_solve(r);
        }
        return v;
      };

      std::vector<Eigen::MatrixXcd> SRX(nb);
      for (int b = 0; b < nb; ++b) SRX[b] = Sinv[b] * Rd[b] * X[b];

      // one direction for a given complementarity target (W, w)
      std::vector<Eigen::MatrixXcd> dX(nb), dS(nb);
      Eigen::VectorXd dy(m), ds(st_.n_scal), dz(st_.n_scal);
      auto directions = [&](const std::vector<Eigen::MatrixXcd>& W, const Eigen::VectorXd& w) {
        Eigen::VectorXd rhs = rp;
        for (int k = 0; k < m; ++k) {
          const Row& row = st_.rows[k];
          for (const auto& [b, a] : row.mats)
            rhs[k] += re_trace_prod(a, SRX[b]) - re_trace_prod(a, W[b]);
          for (const auto& [i, c] : row.scals)
            rhs[k] += c * ((s[i] / z[i]) * rdz[i] - w[i]);
        }
        dy = schur_solve(rhs);
        for (int b = 0; b < nb; ++b) {
          dS[b] = Rd[b];
          for (const auto& [k, ti] : block_rows_[b])
            dS[b] -= dy[k] * st_.rows[k].mats[ti].second;
          dX[b] = W[b] - Sinv[b] * dS[b] * X[b];
          dX[b] = (0.5 * (dX[b] + dX[b].adjoint())).eval();
        }
        for (int i = 0; i < st_.n_scal; ++i) {
          double v = rdz[i];
          for (const auto& [k, c] : scal_rows_[i]) v -= dy[k] * c;
          dz[i] = v;
          ds[i] = w[i] - (s[i] / z[i]) * dz[i];
        }
      };

      auto max_block_step = [&](const std::vector<Eigen::LLT<Eigen::MatrixXcd>>& fact,
                                const std::vector<Eigen::MatrixXcd>& D) {
        double amax = inf;
        for (int b = 0; b < nb; ++b) {
          const Eigen::MatrixXcd t1 = fact[b].matrixL().solve(D[b]);
          const Eigen::MatrixXcd h = fact[b].matrixL().solve(t1.adjoint());
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
          const double lmin = es.eigenvalues().minCoeff();
          if (lmin < 0.0) amax = std::min(amax, -1.0 / lmin);
        }
        return amax;
      };
      auto max_vec_step = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& d) {
        double amax = inf;
        for (int i = 0; i < v.size(); ++i)
          if (d[i] < 0.0) amax = std::min(amax, -v[i] / d[i]);
        return amax;
      };

      // predictor: pure affine step
      std::vector<Eigen::MatrixXcd> W(nb);
      for (int b = 0; b < nb; ++b) W[b] = -X[b];
      directions(W, -s);
      const double ap_aff = std::min(1.0, 0.999 * std::min(max_block_step(lx, dX),
                                                           max_vec_step(s, ds)));
      const double ad_aff = std::min(1.0, 0.999 * std::min(max_block_step(ls, dS),
                                                           max_vec_step(z, dz)));
      double comp_aff = (s + ap_aff * ds).dot(z + ad_aff * dz);
      for (int b = 0; b < nb; ++b)
        comp_aff += re_inner(X[b] + ap_aff * dX[b], S[b] + ad_aff * dS[b]);
      const double sigma =
          std::clamp(std::pow(std::max(comp_aff, 0.0) / comp, 3.0), 1e-8, 0.99);

      // corrector: recenter toward sigma*mu with the second-order term
      Eigen::VectorXd w2(st_.n_scal);
      for (int b = 0; b < nb; ++b)
        W[b] = sigma * mu * Sinv[b] - X[b] - Sinv[b] * dS[b] * dX[b];
      for (int i = 0; i < st_.n_scal; ++i)
        w2[i] = (sigma * mu - s[i] * z[i] - ds[i] * dz[i]) / z[i];
      directions(W, w2);

      const double tau = 0.98;
      const double ap =
          std::min(1.0, tau * std::min(max_block_step(lx, dX), max_vec_step(s, ds)));
      const double ad =
          std::min(1.0, tau * std::min(max_block_step(ls, dS), max_vec_step(z, dz)));
      if (ap < 1e-8 && ad < 1e-8) {
        if (++short_steps >= 3) {
          res.stalled = true;
          return res;
        }
      } else {
        short_steps = 0;
      }

      for (int b = 0; b < nb; ++b) {
        X[b] += ap * dX[b];
        S[b] += ad * dS[b];
      }
      s += ap * ds;
      z += ad * dz;
      y += ad * dy;

      // Farkas-style certificate: A^T yhat in the dual cone with b^T yhat > 0
      // proves that no feasible point exists
      const double yn = inf_norm(y);
      if (yn > 10.0) {
        const Eigen::VectorXd yh = y / yn;
        if (bvec_.dot(yh) > 1e-6 * (1.0 + st_.bnorm)) {
          bool cert = true;
          for (int b = 0; b < nb && cert; ++b) {
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(st_.dims[b], st_.dims[b]);
            for (const auto& [k, ti] : block_rows_[b])
              acc += yh[k] * st_.rows[k].mats[ti].second;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(acc, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().maxCoeff() > 1e-9) cert = false;
          }
          for (int i = 0; i < st_.n_scal && cert; ++i) {
            double v = 0.0;
            for (const auto& [k, c] : scal_rows_[i]) v += yh[k] * c;
            if (v > 1e-9) cert = false;
          }
          if (cert) {
            res.infeasible = true;
            return res;
          }
        }
        if (yn > 1e13) {
          res.stalled = true;
          return res;
        }
      }
    }
    return res;
  }

 private:
  const Standardized& st_;
  std::vector<std::vector<std::pair<int, int>>> block_rows_;
  std::vector<std::vector<std::pair<int, double>>> scal_rows_;
  Eigen::VectorXd bvec_;
  double deg_ = 0.0;
};

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts) {
  problem.validate();
  const Standardized st = standardize(problem);
  SdpSolution sol;

  PdSolver pd(st);
  const double level = std::max(1.0, st.bnorm);

  if (!opts.warm_blocks.empty()) {
    if (opts.warm_blocks.size() != st.dims.size() ||
        (int)opts.warm_scalars.size() != st.orig_scalars)
      throw ValidationError("sdp solve: warm start shape mismatch");
    pd.X.clear();
    for (size_t b = 0; b < st.dims.size(); ++b) {
      // floor the spectrum so the start is strictly interior
      Eigen::MatrixXcd w = 0.5 * (opts.warm_blocks[b] + opts.warm_blocks[b].adjoint());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w);
      const double floor_ev = std::max(1e-6, 1e-4 * es.eigenvalues().maxCoeff());
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor_ev);
      pd.X.push_back(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
    }
    pd.s = Eigen::VectorXd::Constant(st.n_scal, level);
    for (int i = 0; i < st.orig_scalars; ++i) pd.s[i] = std::max(1e-6, opts.warm_scalars[i]);
    // derive slack values from the residual where the sign allows it
    for (const auto& row : st.rows) {
      if (row.scals.empty()) continue;
      const auto& [idx, coef] = row.scals.back();
      if (idx < st.orig_scalars) continue;  // equality row
      double v = 0.0;
      for (const auto& [b, a] : row.mats) v += re_inner(a, pd.X[b]);
      for (const auto& [i, c] : row.scals)
        if (i < st.orig_scalars) v += c * pd.s[i];
      pd.s[idx] = std::max(1e-6, (row.b - v) / coef);
    }
  } else {
    pd.X.clear();
    for (int d : st.dims) pd.X.push_back(level * Eigen::MatrixXcd::Identity(d, d));
    pd.s = Eigen::VectorXd::Constant(st.n_scal, level);
  }
  pd.start_dual_interior(2.0);  // objective is scaled to unit norm

  const auto run = pd.run(opts.tol, opts.max_iter, sol.iterates);
  sol.newton_steps = run.iterations;

  // report in original variables
  sol.blocks.assign(pd.X.begin(), pd.X.end());
  sol.scalars.assign(pd.s.data(), pd.s.data() + st.orig_scalars);
  sol.objective =
      problem.eval(problem.objective, sol.blocks, sol.scalars) + problem.objective_constant;

  double worst_primal = 0.0;
  for (const auto& con : problem.constraints) {
    const double v = problem.eval(con.expr, sol.blocks, sol.scalars);
    double viol = 0.0;
    if (con.rel == Relation::le) viol = std::max(0.0, v - con.bound);
    if (con.rel == Relation::ge) viol = std::max(0.0, con.bound - v);
    if (con.rel == Relation::eq) viol = std::abs(v - con.bound);
    worst_primal = std::max(worst_primal, viol / (1.0 + std::abs(con.bound)));
  }
  sol.primal_residual = worst_primal;

  // dual slack S = C - sum y_k A_k, rebuilt from the reported multipliers
  double worst_dual = 0.0;
  {
    for (size_t b = 0; b < st.dims.size(); ++b) {
      Eigen::MatrixXcd sblk = st.cmat[b].size()
                                  ? Eigen::MatrixXcd(st.cmat[b])
                                  : Eigen::MatrixXcd::Zero(st.dims[b], st.dims[b]);
      for (size_t k = 0; k < st.rows.size(); ++k)
        for (const auto& [bb, a] : st.rows[k].mats)
          if ((int)b == bb) sblk -= pd.y[k] * a;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sblk, Eigen::EigenvaluesOnly);
      worst_dual = std::max(worst_dual, std::max(0.0, -es.eigenvalues().minCoeff()));
    }
    for (int i = 0; i < st.n_scal; ++i) {
      double r = i < st.orig_scalars ? st.cscal[i] : 0.0;
      for (size_t k = 0; k < st.rows.size(); ++k)
        for (const auto& [ii, c] : st.rows[k].scals)
          if (ii == i) r -= pd.y[k] * c;
      worst_dual = std::max(worst_dual, std::max(0.0, -r));
    }
    worst_dual *= st.cscale;
  }
  sol.dual_residual = worst_dual / (1.0 + st.cscale);

  if (!sol.iterates.empty()) {
    const auto& last = sol.iterates.back();
    sol.duality_gap = std::abs(last.gap) / (1.0 + std::abs(last.primal) + std::abs(last.dual));
  }

  if (run.infeasible) {
    sol.status = SolveStatus::infeasible;
    sol.message = "primal infeasibility certificate found";
  } else if (run.converged && sol.primal_residual <= 1e-7 && sol.dual_residual <= 1e-7) {
    sol.status = SolveStatus::optimal;
  } else {
    sol.status = SolveStatus::max_iter;
    sol.message = "stopped before reaching the gap target";
  }
  return sol;
}

RankOneResult check_rank_one(const Eigen::MatrixXcd& x, double tol) {
  RankOneResult r;
  if (x.rows() != x.cols()) throw ValidationError("check_rank_one: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (x + x.adjoint()));
  const int n = (int)x.rows();
  const double l1 = es.eigenvalues()(n - 1);
  const double l2 = n >= 2 ? std::max(0.0, es.eigenvalues()(n - 2)) : 0.0;
  if (l1 <= 0.0) {
    r.is_rank_one = true;
    r.principal = Eigen::VectorXcd::Zero(n);
    r.ratio = 0.0;
    return r;
  }
  r.ratio = l2 / l1;
  r.is_rank_one = r.ratio <= tol;
  r.principal = std::sqrt(l1) * es.eigenvectors().col(n - 1);
  return r;
}

}  // namespace uavris::sdp

#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "uavris/common.hpp"

namespace uavris::sdp {

enum class Relation { le, eq, ge };
enum class SolveStatus { optimal, infeasible, max_iter };

const char* to_string(SolveStatus s);

/// One summand Re tr(coeff * X_block); coeff must be Hermitian.
struct TraceTerm {
  int block = -1;
  Eigen::MatrixXcd coeff;
};

/// Real linear functional of the matrix blocks and nonnegative scalars.
struct LinearExpr {
  std::vector<TraceTerm> terms;
  std::vector<std::pair<int, double>> scalars;  // (scalar index, coefficient)

  LinearExpr& add(int block, Eigen::MatrixXcd coeff);
  LinearExpr& add_scalar(int idx, double coeff);
};

struct Constraint {
  LinearExpr expr;
  Relation rel = Relation::eq;
  double bound = 0.0;
  std::string name;  // diagnostics only
};

/// minimize  <objective, x> + objective_constant
/// subject to constraints, X_b >= 0 (PSD), scalars >= 0.
struct SdpProblem {
  std::vector<int> block_dims;
  int num_scalars = 0;
  LinearExpr objective;
  double objective_constant = 0.0;
  std::vector<Constraint> constraints;

  int add_block(int dim);
  int add_scalar();
  void validate() const;
  double eval(const LinearExpr& e, const std::vector<Eigen::MatrixXcd>& blocks,
              const std::vector<double>& scalars) const;
  /// Text dump for external cross-checking; format documented in the README.
  void dump(std::ostream& out) const;
};

struct IterateRecord {
  double primal = 0.0, dual = 0.0, gap = 0.0;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::max_iter;
  std::vector<Eigen::MatrixXcd> blocks;
  std::vector<double> scalars;
  double objective = 0.0;
  double primal_residual = 0.0;  // worst relative constraint violation
  double dual_residual = 0.0;    // worst negative eigenvalue of the dual slack
  double duality_gap = 0.0;      // relative
  int newton_steps = 0;
  std::vector<IterateRecord> iterates;  // logged once per iteration
  std::string message;
};

struct SolveOptions {
  double tol = 1e-8;   // relative duality gap target
  int max_iter = 200;  // predictor-corrector iteration budget
  std::vector<Eigen::MatrixXcd> warm_blocks;
  std::vector<double> warm_scalars;
};

/// Primal-dual interior-point method over the PSD blocks and the nonnegative
/// scalars. Inequalities get internal slack variables; the iteration starts
/// from an infeasible interior point, so no separate feasibility phase is
/// needed, and a diverging multiplier ray that certifies an empty feasible set
/// flags the problem infeasible. Every logged iterate is strictly interior, so
/// its gap entry is a positive complementarity value and weak duality holds at
/// each record. The returned KKT residuals are measured on the original
/// constraint list. Deterministic.
SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {});
inline SdpSolution solve(const SdpProblem& p, double tol, int max_iter) {
  SolveOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  return solve(p, o);
}

struct RankOneResult {
  bool is_rank_one = false;
  Eigen::VectorXcd principal;  // scaled so principal * principal^H ~ X
  double ratio = 0.0;          // second / largest eigenvalue
};

RankOneResult check_rank_one(const Eigen::MatrixXcd& x, double tol);

}  // namespace uavris::sdp

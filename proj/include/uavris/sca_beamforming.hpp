#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uavris/rates.hpp"
#include "uavris/sdp_solver.hpp"

namespace uavris::sca {

/// One decode-order candidate on (sbs, subcarrier): `strong` decodes and
/// cancels `weak`'s message before its own; `weak < 0` marks a single-user
/// assignment with no cancellation step.
struct Candidate {
  int sbs = 0;
  int subcarrier = 0;
  int strong = 0;  // cell-local user index
  int weak = -1;
  bool is_pair() const { return weak >= 0; }
};

/// Affine functional of the lifted blocks: constant + sum_i Re tr(coeff_i X_i).
/// Arguments of every logarithm in the solver have this shape.
struct AffineArg {
  std::string label;  // used to name the term in domain errors
  double constant = 0.0;
  std::vector<std::pair<int, Eigen::MatrixXcd>> terms;  // (block handle, Hermitian coeff)

  double eval(const std::vector<Eigen::MatrixXcd>& blocks) const;
};

/// Tangent of log2(arg) at an expansion point. Concavity of log-of-affine
/// makes the affine form a global over-estimator, exact at the expansion
/// point.
struct LogTangent {
  double constant = 0.0;
  std::vector<std::pair<int, Eigen::MatrixXcd>> grads;

  double eval(const std::vector<Eigen::MatrixXcd>& blocks) const;
};

/// Throws ValidationError (naming arg.label) if the argument is not strictly
/// positive at the expansion point.
LogTangent linearize_log2(const AffineArg& arg, const std::vector<Eigen::MatrixXcd>& at);

/// Per-candidate log-argument decomposition. All rates and decode margins are
/// differences of log2 of these strictly positive affine forms; powers are
/// measured in noise units, so every constant term is 1:
///   strong rate   = log2(strong_sig) - log2(strong_base)
///   weak rate     = log2(weak_sig) - log2(weak_base)
///   decode margin = weak rate - [log2(strong_cross) - log2(strong_sig)]
struct PairDecomposition {
  Candidate cand;
  AffineArg strong_sig;    // strong user's signal plus its interference floor
  AffineArg strong_base;   // interference floor at the strong user
  AffineArg weak_sig;      // weak user's signal plus floor (pairs only)
  AffineArg weak_base;     // floor at the weak user, strong beam included
  AffineArg strong_cross;  // weak message as seen by the strong user
  double kappa = 0.0;      // rate cap constant offsetting the decode margins
};

/// Values of the eight aggregate terms whose differences reproduce the exact
/// rates: f-g is the candidate's service sum (both members plus the strong
/// member's microwave side), t-r the weak rate, and (a-b)-(c-d) the decode
/// margin with the slack variable cancelled.
struct TermValues {
  double f = 0, g = 0, t = 0, r = 0, a = 0, b = 0, c = 0, d = 0;
};

/// Block/scalar handles of one relaxed problem.
struct Layout {
  struct PairVars {
    Candidate cand;
    int wt_strong = -1, wt_weak = -1;  // indicator-gated lifts (the working variables)
    int w_strong = -1, w_weak = -1;    // ungated partners (absent when frozen)
    int y_cap_s = -1, y_cap_w = -1;    // slack blocks: P*z*I - wt        (PSD)
    int y_le_s = -1, y_le_w = -1;      //               w - wt            (PSD)
    int y_ge_s = -1, y_ge_w = -1;      //               wt - w + (1-z)P*I (PSD)
    int z = -1, eta = -1;              // scalar handles
  };
  struct MuwVars {
    int x = 0, mue = 0;
    int block = -1;
  };
  std::vector<PairVars> pairs;
  std::vector<MuwVars> muw;
  int num_blocks = 0;
  int num_scalars = 0;
};

/// Full variable assignment (all blocks and scalars of a Layout); doubles as
/// the expansion point of the next linearization.
struct Point {
  std::vector<Eigen::MatrixXcd> blocks;
  std::vector<double> scalars;
};

struct AuditReport {
  bool feasible = false;
  double worst_slack = 0.0;  // most negative margin over all checks
  std::string worst_name;
  double power = 0.0;      // drain-weighted transmit power, watts
  double objective = 0.0;  // power plus the indicator-rounding penalty
};

struct ScaOptions {
  double alpha = 1e5;         // indicator-rounding penalty weight
  double rate_margin = 1e-4;  // bits of headroom built into every rate row
  double sic_margin = 1e-5;   // bits of headroom in the decode-order rows
  int max_outer = 30;         // relinearization budget
  int repolish_outer = 25;    // extra relinearizations after rounding
  double rel_tol = 1e-4;      // relative objective improvement cutoff
  double sdp_tol = 1e-8;
  int sdp_budget = 100;
  int randomization_samples = 100;
  std::uint64_t seed = 1;  // randomized recovery draws
  bool oma = false;        // single-user candidates only, no cancellation
};

/// Builds and evaluates the relaxed transmit-design problems for one slot
/// with fixed panels and a fixed microwave schedule. Candidates are
/// strength-ordered; `fixed` freezes the pairing (indicators pinned to one,
/// gating plumbing dropped), which is the post-rounding polish form.
class LiftedProgram {
 public:
  LiftedProgram(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                const std::vector<std::vector<int>>& rho, const NetworkConfig& cfg,
                const ScaOptions& opts);
  LiftedProgram(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                const std::vector<std::vector<int>>& rho, const NetworkConfig& cfg,
                const ScaOptions& opts, std::vector<Candidate> fixed);

  const Layout& layout() const { return layout_; }
  const std::vector<PairDecomposition>& decompositions() const { return decomps_; }
  const std::vector<AffineArg>& muw_args() const { return muw_args_; }
  bool frozen() const { return frozen_; }

  /// Exact values of the eight named terms for one candidate at a point.
  TermValues term_values(int pair_index, const Point& p) const;

  /// The linearized problem expanded at `at`; a point passing audit() is
  /// feasible for its own expansion.
  sdp::SdpProblem assemble(const Point& at) const;

  /// Exact-logarithm feasibility of the margin-tightened constraint set.
  AuditReport audit(const Point& p) const;
  double objective(const Point& p) const;

  /// Maximum-ratio start scaled to meet the rate floors, with the decode
  /// order fixed by channel strength. Empty when no start passes audit().
  // heuristic feasible starting point; on failure, *last_fail (when given)
  // holds the audit of the closest attempt
  std::optional<Point> initial_point(AuditReport* last_fail = nullptr) const;

  /// Up to two feasible starts, cheapest first: the best point found among
  /// shared-carrier pairings and the best among one-user-per-carrier
  /// patterns. Descending from both and keeping the cheaper stationary
  /// point avoids committing to a basin on start cost alone.
  std::vector<Point> initial_points(AuditReport* last_fail = nullptr) const;

 private:
  void build(const std::vector<Candidate>* fixed);
  int block_dim(int handle) const;

  const ChannelSet& cs_;
  const std::vector<PhaseShiftMatrix>& phases_;
  std::vector<std::vector<int>> rho_;
  const NetworkConfig& cfg_;
  ScaOptions opts_;
  bool frozen_ = false;

  Layout layout_;
  std::vector<PairDecomposition> decomps_;
  std::vector<AffineArg> muw_args_;
  std::vector<int> block_dims_;
  // lifted channels in noise units: [l][j_tx * num_sues + sue]
  std::vector<std::vector<Eigen::MatrixXcd>> hhat_;
};

enum class ScaStatus { optimal, infeasible, max_iter };
const char* to_string(ScaStatus s);

struct BeamformingSolution {
  ScaStatus status = ScaStatus::infeasible;
  BeamformerSet beams;  // recovered transmit vectors, active candidates only
  AllocationSet alloc;  // chosen pairs plus the frozen microwave schedule
  double p_total_w = 0.0;
  std::vector<double> sue_rates;  // achieved, vector form
  std::vector<double> mue_rates;
  std::vector<double> objective_history;  // accepted iterates, non-increasing
  std::vector<Candidate> candidates;
  std::vector<double> z_relaxed;   // aligned with candidates
  std::vector<double> z_rounded;   // after threshold + repair
  std::vector<double> rank_ratios; // second/largest eigenvalue per recovered lift
  double gating_zero_residual = 0.0;  // max ||wt||/P over rounded-off candidates
  double gating_one_residual = 0.0;   // max ||wt - w||/(1+||w||) over rounded-on ones
  int iterations = 0;
  std::string diagnostics;  // JSON summary of the solve
};

/// Full inner solve: iterate linearize/solve/step to a stationary point,
/// round the pairing indicators, repolish the frozen problem, and recover
/// transmit vectors from the lifts.
BeamformingSolution sca_solve(const ChannelSet& cs, const std::vector<PhaseShiftMatrix>& phases,
                              const std::vector<std::vector<int>>& rho,
                              const NetworkConfig& cfg, const ScaOptions& opts = {});

/// Vector-form re-check of the recovered solution: power caps, rate floors,
/// pairing cardinality, and decode margins, all through the rates module.
AuditReport audit_vector_solution(const ChannelSet& cs,
                                  const std::vector<PhaseShiftMatrix>& phases,
                                  const BeamformerSet& beams, const AllocationSet& alloc,
                                  const NetworkConfig& cfg, double tol);

struct RandomizedBeam {
  Eigen::VectorXcd w;
  bool feasible = false;
};

/// Rank-one recovery. A lift that already passes check_rank_one returns its
/// principal vector unchanged. Otherwise draws `num_samples` candidates from
/// the zero-mean complex Gaussian with the lift as covariance, rescales each
/// via `min_power` (squared norm making that unit direction feasible, or
/// nullopt), and returns the least-power feasible one; falls back to the
/// rescaled principal eigenvector when no draw works.
RandomizedBeam gaussian_randomization(
    const Eigen::MatrixXcd& lift, int num_samples,
    const std::function<std::optional<double>(const Eigen::VectorXcd&)>& min_power, Rng& rng);

}  // namespace uavris::sca

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavris/sca_beamforming.hpp"

namespace uavris {

struct Velocity {
  double x = 0.0, y = 0.0, z = 0.0;
  double norm() const;
};

/// Horizontal moves map to the grid axes (left/right along x, backward/forward
/// along y), vertical moves to z, and hover requests zero velocity.
enum class Move { left, right, forward, backward, up, down, hover };
const char* to_string(Move m);

/// One agent's discrete choice for a slot.
struct Action {
  Move move = Move::hover;
  int speed_index = 0;    // into NetworkConfig::speed_levels_mps
  int phase_pattern = 0;  // panel steering template
  int rho_pattern = 0;    // microwave schedule rotation
};

/// Mixed-radix catalogue of per-agent actions. Encoding order: move is the
/// most significant digit, then speed, then phase pattern, then schedule
/// rotation (fastest varying).
struct ActionSpace {
  int moves = 0, speeds = 0, phase_patterns = 0, rho_patterns = 0;
  long total() const;
  long encode(const Action& a) const;
  Action decode(long index) const;
};

/// Builds the catalogue from the config. A panel with zero elements collapses
/// the steering axis to a single template. Throws ConfigError when the
/// catalogue would exceed cfg.max_actions.
ActionSpace enumerate_actions(const NetworkConfig& cfg);

/// New velocity after one slot: the requested vector (speed along the move
/// axis, zero for hover) is pulled back onto the ball of radius a_max*tau
/// around the previous velocity, then clipped to speed v_max.
Velocity velocity_update(const Velocity& v_prev, Move move, double speed_mps, double tau,
                         double a_max, double v_max);

/// Steering template: picks a waypoint by spreading `pattern` across the
/// position grid, then co-phases the panel so the line-of-sight cascade
/// MBS -> panel -> waypoint adds coherently, quantized to the phase grid.
PhaseShiftMatrix phase_pattern_matrix(const NetworkConfig& cfg, const Position& uav, int pattern);

/// Schedule rotation r: microwave carrier x serves user (x + r) mod num_mbs_users,
/// one user per carrier.
std::vector<std::vector<int>> rho_pattern(const NetworkConfig& cfg, int r);

struct EnvState {
  std::vector<Position> uav_positions;
  std::vector<Velocity> uav_velocities;
  ChannelSet channels;
  int slot = 0;
};

/// One experience tuple: joint action, reward earned, and both endpoint states.
struct Transition {
  EnvState state;
  std::vector<Action> actions;
  double reward = 0.0;
  EnvState next_state;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;  // 1 / total transmit watts, or 0 (see Environment::step)
  bool altitude_clamped = false;  // some agent left [h_min, h_max] and was clamped
  bool position_clamped = false;  // any clamping at all, including horizontal
  std::vector<PhaseShiftMatrix> phases;  // applied panels, one per agent
  std::vector<std::vector<int>> rho;     // applied microwave schedule
  sca::BeamformingSolution inner;        // transmit design at the new state
};

/// Slot-stepped control environment around the inner transmit-design solve.
///
/// Dynamics: each agent's velocity is updated under the acceleration and
/// speed caps, positions advance by one slot, panels re-steer, channels are
/// re-drawn deterministically from (master seed, episode, slot), and the
/// inner solve prices the new state. Reward is 1 / total transmit power in
/// watts; an infeasible design or an altitude clamp earns 0. Horizontal
/// excursions are clamped to the grid box without penalty. Stored velocities
/// are the capped requests, so the kinematic caps hold exactly even on
/// clamped steps; only the displacement identity breaks then (flagged).
class Environment {
 public:
  Environment(const NetworkConfig& cfg, std::uint64_t master_seed,
              const sca::ScaOptions& inner = default_inner_options());

  /// Inner-solve settings used during stepping: full defaults with the
  /// relinearization budget trimmed for per-step latency.
  static sca::ScaOptions default_inner_options();

  const NetworkConfig& config() const { return cfg_; }
  const ActionSpace& action_space() const { return space_; }
  std::uint64_t episode_seed() const { return episode_seed_; }

  /// Agents at their initial positions, at rest, with slot-0 channels.
  EnvState reset(int episode);

  /// Advances one slot. Expects one action per agent; agent 0's rotation
  /// choice fixes the shared microwave schedule.
  StepResult step(const EnvState& state, const std::vector<Action>& actions) const;

 private:
  NetworkConfig cfg_;
  ActionSpace space_;
  std::uint64_t master_seed_ = 0;
  std::uint64_t episode_seed_ = 0;
  sca::ScaOptions inner_;
};

struct TransitionAudit {
  bool ok = true;
  std::vector<std::string> violations;  // one line per failed check
};

/// Re-checks every stepping invariant on a realized transition: panel phases
/// on the quantization grid, altitude and horizontal bounds, acceleration and
/// speed caps, a binary one-user-per-carrier microwave schedule, and the
/// displacement identity on unclamped steps.
TransitionAudit audit_transition(const NetworkConfig& cfg, const EnvState& prev,
                                 const std::vector<Action>& actions, const StepResult& res,
                                 double tol = 1e-9);

}  // namespace uavris

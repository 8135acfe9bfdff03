#include "uavris/mdp_env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uavris {

double Velocity::norm() const { return std::sqrt(x * x + y * y + z * z); }

const char* to_string(Move m) {
  switch (m) {
    case Move::left: return "left";
    case Move::right: return "right";
    case Move::forward: return "forward";
    case Move::backward: return "backward";
    case Move::up: return "up";
    case Move::down: return "down";
    case Move::hover: return "hover";
  }
  return "?";
}

long ActionSpace::total() const {
  return (long)moves * speeds * phase_patterns * rho_patterns;
}

long ActionSpace::encode(const Action& a) const {
  const int m = (int)a.move;
  if (m < 0 || m >= moves || a.speed_index < 0 || a.speed_index >= speeds ||
      a.phase_pattern < 0 || a.phase_pattern >= phase_patterns || a.rho_pattern < 0 ||
      a.rho_pattern >= rho_patterns)
    throw ValidationError("action space: field out of range in encode");
  return ((((long)m * speeds + a.speed_index) * phase_patterns + a.phase_pattern) *
          rho_patterns) +
         a.rho_pattern;
}

Action ActionSpace::decode(long index) const {
  if (index < 0 || index >= total())
    throw ValidationError("action space: index out of range in decode");
  Action a;
  a.rho_pattern = (int)(index % rho_patterns);
  index /= rho_patterns;
  a.phase_pattern = (int)(index % phase_patterns);
  index /= phase_patterns;
  a.speed_index = (int)(index % speeds);
  index /= speeds;
  a.move = (Move)(int)index;
  return a;
}

ActionSpace enumerate_actions(const NetworkConfig& cfg) {
  ActionSpace s;
  s.moves = 7;
  s.speeds = (int)cfg.speed_levels_mps.size();
  if (s.speeds < 1) throw ConfigError("enumerate_actions: need at least one speed level");
  s.phase_patterns = cfg.ris_elements() > 0 ? cfg.phase_patterns : 1;
  if (s.phase_patterns < 1)
    throw ConfigError("enumerate_actions: need at least one phase pattern");
  s.rho_patterns = cfg.rho_patterns;
  if (s.rho_patterns < 1)
    throw ConfigError("enumerate_actions: need at least one schedule rotation");
  const double approx =
      (double)s.moves * s.speeds * (double)s.phase_patterns * (double)s.rho_patterns;
  if (approx > (double)cfg.max_actions) {
    std::ostringstream os;
    os << "enumerate_actions: catalogue has " << approx << " entries, over the cap "
       << cfg.max_actions << "; reduce phase_patterns or rho_patterns (smaller codebook)";
    throw ConfigError(os.str());
  }
  return s;
}

Velocity velocity_update(const Velocity& v_prev, Move move, double speed_mps, double tau,
                         double a_max, double v_max) {
  if (speed_mps < 0.0) throw ValidationError("velocity_update: negative speed");
  Velocity want;
  switch (move) {
    case Move::left: want.x = -speed_mps; break;
    case Move::right: want.x = speed_mps; break;
    case Move::forward: want.y = speed_mps; break;
    case Move::backward: want.y = -speed_mps; break;
    case Move::up: want.z = speed_mps; break;
    case Move::down: want.z = -speed_mps; break;
    case Move::hover: break;
  }
  Velocity dv{want.x - v_prev.x, want.y - v_prev.y, want.z - v_prev.z};
  const double step = dv.norm();
  const double cap = a_max * tau;
  Velocity v = want;
  if (step > cap && step > 0.0) {
    const double f = cap / step;
    v = {v_prev.x + dv.x * f, v_prev.y + dv.y * f, v_prev.z + dv.z * f};
  }
  const double speed = v.norm();
  if (speed > v_max && speed > 0.0) {
    const double f = v_max / speed;
    v = {v.x * f, v.y * f, v.z * f};
  }
  return v;
}

namespace {

// Per-element phase slope of the planar array response toward `target`: the
// response entry (kx, ky) carries slope * (kx + ky), with half-wavelength
// spacing baked into the -pi factor.
double response_slope(const Position& from, const Position& target) {
  if (distance(from, target) < 1e-9) return 0.0;  // waypoint on top of the panel: broadside
  const AodAngles a = aod_angles(from, target);
  return -kPi * std::sin(a.theta) * std::cos(a.phi);
}

}  // namespace

PhaseShiftMatrix phase_pattern_matrix(const NetworkConfig& cfg, const Position& uav,
                                      int pattern) {
  const int n = cfg.ris_elements();
  if (n == 0) return PhaseShiftMatrix::from_ticks({}, cfg.phase_grid);
  const int patterns = std::max(1, cfg.phase_patterns);
  if (pattern < 0 || pattern >= patterns)
    throw ValidationError("phase_pattern_matrix: pattern out of range");
  const int res = cfg.grid.resolution;
  const long cells = (long)res * res * res;
  const long cell = (long)(((long double)pattern * cells) / patterns);
  const int k3 = (int)(cell % res) + 1;
  const int k2 = (int)((cell / res) % res) + 1;
  const int k1 = (int)(cell / ((long)res * res)) + 1;
  const Position waypoint = grid_center(cfg.grid, k1, k2, k3);

  // Cancel the combined inbound + outbound response slope so the cascade
  // through the panel adds coherently toward the waypoint.
  const double slope = response_slope(uav, cfg.mbs_position) + response_slope(uav, waypoint);
  const double tick = 2.0 * kPi / cfg.phase_grid;
  std::vector<int> ticks(n);
  for (int kx = 0; kx < cfg.ris_nx; ++kx)
    for (int ky = 0; ky < cfg.ris_ny; ++ky) {
      long t = std::lround(-slope * (kx + ky) / tick) % cfg.phase_grid;
      if (t < 0) t += cfg.phase_grid;
      ticks[kx * cfg.ris_ny + ky] = (int)t;
    }
  return PhaseShiftMatrix::from_ticks(std::move(ticks), cfg.phase_grid);
}

std::vector<std::vector<int>> rho_pattern(const NetworkConfig& cfg, int r) {
  if (r < 0 || r >= std::max(1, cfg.rho_patterns))
    throw ValidationError("rho_pattern: rotation out of range");
  std::vector<std::vector<int>> rho(cfg.muw_subcarriers,
                                    std::vector<int>(cfg.num_mbs_users, 0));
  if (cfg.num_mbs_users > 0)
    for (int x = 0; x < cfg.muw_subcarriers; ++x) rho[x][(x + r) % cfg.num_mbs_users] = 1;
  return rho;
}

sca::ScaOptions Environment::default_inner_options() {
  sca::ScaOptions o;
  o.max_outer = 20;
  return o;
}

Environment::Environment(const NetworkConfig& cfg, std::uint64_t master_seed,
                         const sca::ScaOptions& inner)
    : cfg_(cfg), space_(enumerate_actions(cfg)), master_seed_(master_seed), inner_(inner) {
  cfg_.validate();
  if ((int)cfg_.uav_init_positions.size() != cfg_.num_uav)
    throw ConfigError("environment: one initial position per agent required");
}

EnvState Environment::reset(int episode) {
  episode_seed_ = derive_seed(master_seed_, (std::uint64_t)episode);
  EnvState st;
  st.uav_positions = cfg_.uav_init_positions;
  st.uav_velocities.assign(cfg_.num_uav, Velocity{});
  st.slot = 0;
  st.channels = build_channel_set(cfg_, st.uav_positions, episode_seed_, 0);
  return st;
}

StepResult Environment::step(const EnvState& state, const std::vector<Action>& actions) const {
  if ((int)actions.size() != cfg_.num_uav)
    throw ValidationError("step: one action per agent required");
  if ((int)state.uav_positions.size() != cfg_.num_uav ||
      (int)state.uav_velocities.size() != cfg_.num_uav)
    throw ValidationError("step: state does not match the configured agent count");

  StepResult res;
  res.next.slot = state.slot + 1;
  res.next.uav_positions.resize(cfg_.num_uav);
  res.next.uav_velocities.resize(cfg_.num_uav);
  res.phases.resize(cfg_.num_uav);
  const double tau = cfg_.slot_duration_s;
  const GridSpec& g = cfg_.grid;
  for (int u = 0; u < cfg_.num_uav; ++u) {
    const Action& a = actions[u];
    space_.encode(a);  // range validation
    const double speed = cfg_.speed_levels_mps.at(a.speed_index);
    const Velocity v = velocity_update(state.uav_velocities[u], a.move, speed, tau,
                                       cfg_.a_max_mps2, cfg_.v_max_mps);
    Position q = state.uav_positions[u];
    q.x += v.x * tau;
    q.y += v.y * tau;
    q.z += v.z * tau;
    if (q.z < g.h_min || q.z > g.h_max) {
      q.z = std::clamp(q.z, g.h_min, g.h_max);
      res.altitude_clamped = true;
      res.position_clamped = true;
    }
    const double qx = std::clamp(q.x, g.x_min, g.x_max);
    const double qy = std::clamp(q.y, g.y_min, g.y_max);
    if (qx != q.x || qy != q.y) res.position_clamped = true;
    q.x = qx;
    q.y = qy;
    res.next.uav_positions[u] = q;
    res.next.uav_velocities[u] = v;
    res.phases[u] = phase_pattern_matrix(cfg_, q, a.phase_pattern);
  }
  res.rho = rho_pattern(cfg_, actions.empty() ? 0 : actions[0].rho_pattern);
  res.next.channels = build_channel_set(cfg_, res.next.uav_positions, episode_seed_,
                                        res.next.slot);

  sca::ScaOptions opts = inner_;
  opts.seed = derive_seed(episode_seed_, (std::uint64_t)res.next.slot, 0xbea3);
  res.inner = sca::sca_solve(res.next.channels, res.phases, res.rho, cfg_, opts);
  const bool feasible = res.inner.status != sca::ScaStatus::infeasible;
  res.reward = (feasible && !res.altitude_clamped && res.inner.p_total_w > 0.0)
                   ? 1.0 / res.inner.p_total_w
                   : 0.0;
  return res;
}

namespace {

void check(TransitionAudit& audit, bool ok, const std::string& what) {
  if (ok) return;
  audit.ok = false;
  audit.violations.push_back(what);
}

}  // namespace

TransitionAudit audit_transition(const NetworkConfig& cfg, const EnvState& prev,
                                 const std::vector<Action>& actions, const StepResult& res,
                                 double tol) {
  TransitionAudit audit;
  std::ostringstream os;
  check(audit, (int)actions.size() == cfg.num_uav, "one action per agent");
  check(audit, (int)res.phases.size() == cfg.num_uav, "one panel setting per agent");
  const double tick = 2.0 * kPi / cfg.phase_grid;
  for (int u = 0; u < (int)res.phases.size(); ++u) {
    const PhaseShiftMatrix& p = res.phases[u];
    check(audit, p.size() == cfg.ris_elements(), "panel size matches the config");
    for (int n = 0; n < p.size(); ++n) {
      const double ang = p.angle(n);
      const double snapped = std::round(ang / tick) * tick;
      if (std::abs(ang - snapped) > tol || ang < -tol || ang >= 2.0 * kPi + tol) {
        os.str("");
        os << "phase off the quantization grid: agent " << u << " element " << n;
        check(audit, false, os.str());
      }
    }
  }
  const GridSpec& g = cfg.grid;
  const double cap = cfg.a_max_mps2 * cfg.slot_duration_s;
  for (int u = 0; u < (int)res.next.uav_positions.size(); ++u) {
    const Position& q = res.next.uav_positions[u];
    if (q.z < g.h_min - tol || q.z > g.h_max + tol) {
      os.str("");
      os << "altitude out of bounds: agent " << u;
      check(audit, false, os.str());
    }
    if (q.x < g.x_min - tol || q.x > g.x_max + tol || q.y < g.y_min - tol ||
        q.y > g.y_max + tol) {
      os.str("");
      os << "horizontal position out of bounds: agent " << u;
      check(audit, false, os.str());
    }
    const Velocity& v = res.next.uav_velocities[u];
    const Velocity& vp = prev.uav_velocities[u];
    const Velocity dv{v.x - vp.x, v.y - vp.y, v.z - vp.z};
    if (dv.norm() > cap + tol) {
      os.str("");
      os << "acceleration cap exceeded: agent " << u;
      check(audit, false, os.str());
    }
    if (v.norm() > cfg.v_max_mps + tol) {
      os.str("");
      os << "speed cap exceeded: agent " << u;
      check(audit, false, os.str());
    }
    if (!res.position_clamped) {
      const Position& qp = prev.uav_positions[u];
      const double tau = cfg.slot_duration_s;
      const double miss = std::sqrt(std::pow(q.x - (qp.x + v.x * tau), 2) +
                                    std::pow(q.y - (qp.y + v.y * tau), 2) +
                                    std::pow(q.z - (qp.z + v.z * tau), 2));
      if (miss > tol) {
        os.str("");
        os << "displacement does not match the stored velocity: agent " << u;
        check(audit, false, os.str());
      }
    }
  }
  check(audit, (int)res.rho.size() == cfg.muw_subcarriers,
        "one schedule row per microwave carrier");
  for (int x = 0; x < (int)res.rho.size(); ++x) {
    int sum = 0;
    bool binary = (int)res.rho[x].size() == cfg.num_mbs_users;
    for (int val : res.rho[x]) {
      binary = binary && (val == 0 || val == 1);
      sum += val;
    }
    if (!binary || sum > 1) {
      os.str("");
      os << "schedule row not a binary one-user choice: carrier " << x;
      check(audit, false, os.str());
    }
  }
  check(audit, res.next.slot == prev.slot + 1, "slot advances by one");
  return audit;
}

}  // namespace uavris

#include "quadnav/lowlevel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadnav {

namespace {
double fract(double v) { return v - std::floor(v); }
}  // namespace

PhaseClock advance_phase(PhaseClock clock, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  clock.phase = fract(clock.phase + clock.frequency * dt);
  return clock;
}

std::array<double, kNumLegs> leg_phases(double base_phase,
                                        const std::array<double, 3>& e) {
  // leg order FL, FR, RL, RR; indicator rows: diagonal pair (FR,RL),
  // lateral pair (FR,RR), rear pair (RL,RR)
  static constexpr double kDiag[kNumLegs] = {0, 1, 1, 0};
  static constexpr double kLat[kNumLegs] = {0, 1, 0, 1};
  static constexpr double kRear[kNumLegs] = {0, 0, 1, 1};
  std::array<double, kNumLegs> out{};
  for (int i = 0; i < kNumLegs; ++i)
    out[i] = fract(base_phase + e[0] * kDiag[i] + e[1] * kLat[i] + e[2] * kRear[i]);
  return out;
}

JointVec map_action(const JointVec& a, const ActionMapper& m) {
  if (!(m.a_max > 0.0 && m.scale_alpha > 0.0))
    throw std::runtime_error("ActionMapper requires a_max > 0 and alpha > 0");
  JointVec q{};
  for (int j = 0; j < kNumJoints; ++j)
    q[j] = m.nominal_pose_q0[j] +
           m.scale_alpha * std::clamp(a[j], -m.a_max, m.a_max);
  return q;
}

LowLevelObs build_obs(const ProprioState& prop, const JointVec& a_prev,
                      const JointVec& a_prev2, const CommandVector& c,
                      const PhaseClock& clock) {
  LowLevelObs obs;
  int k = 0;
  for (int j = 0; j < 3; ++j) obs.values[k++] = prop.gravity_dir_body[j];
  for (int j = 0; j < kNumJoints; ++j) obs.values[k++] = prop.joint_pos_err[j];
  for (int j = 0; j < kNumJoints; ++j) obs.values[k++] = prop.joint_vel[j];
  for (int j = 0; j < kNumJoints; ++j) obs.values[k++] = a_prev[j];
  for (int j = 0; j < kNumJoints; ++j) obs.values[k++] = a_prev2[j];
  auto flat = c.flat();
  for (int j = 0; j < kCommandDim; ++j) obs.values[k++] = flat[j];
  auto phases = leg_phases(clock.phase, c.gait_embedding);
  for (int j = 0; j < kNumLegs; ++j) obs.values[k++] = phases[j];
  for (int g = 0; g < kNumGaits; ++g)
    obs.values[k++] = (c.gait_index == g) ? 1.0 : 0.0;
  if (k != kLowLevelObsDim)
    throw std::runtime_error("low-level observation layout mismatch");
  return obs;
}

RewardBreakdown reward_lowlevel(const ProprioState& prop, const CommandVector& c,
                                const JointVec& a, const JointVec& a_prev,
                                const LowLevelConfig& cfg) {
  if (!(cfg.sigma_lin > 0.0 && cfg.sigma_yaw > 0.0))
    throw std::runtime_error("sigma_lin/sigma_yaw must be positive");
  double evx = prop.base_lin_vel[0] - c.continuous[kChVx];
  double evy = prop.base_lin_vel[1] - c.continuous[kChVy];
  double r_lin = std::exp(-(evx * evx + evy * evy) / cfg.sigma_lin);
  double ew = prop.base_ang_vel[2] - c.continuous[kChOmegaZ];
  double r_yaw = std::exp(-(ew * ew) / cfg.sigma_yaw);
  double gx = prop.gravity_dir_body[0];
  double gy = prop.gravity_dir_body[1];
  double gz = prop.gravity_dir_body[2] + 1.0;
  double stab = gx * gx + gy * gy + gz * gz;
  double smooth = 0.0, energy = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    double da = a[j] - a_prev[j];
    smooth += da * da;
    energy += prop.joint_vel[j] * prop.joint_vel[j];
  }
  RewardBreakdown b;
  b.add("lin", r_lin, cfg.weights.lin);
  b.add("yaw", r_yaw, cfg.weights.yaw);
  b.add("stab", stab, cfg.weights.stab);
  b.add("smooth", smooth, cfg.weights.smooth);
  b.add("energy", energy, cfg.weights.energy);
  return b;
}

double surface_height(const HeightField& field, double x, double y) {
  return nearest_cell_height(field, x, y);
}

RobotState surrogate_executor_step(const RobotState& state,
                                   const CommandVector& c, double dt,
                                   const HeightField& field,
                                   const SurrogateConfig& cfg) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  RobotState s = state;
  const GaitCapability& cap = cfg.capability[c.gait_index];

  if (s.falling) {
    // committed fall: descend at a fixed rate until the episode terminates
    s.z -= 2.0 * dt;
    double decay = std::exp(-dt / 0.1);
    s.v_body_x *= decay;
    s.v_body_y *= decay;
    s.omega_z *= decay;
    s.contact_force = 0.0;
    return s;
  }

  // first-order lag tracking of commanded planar velocity and yaw rate
  double kv = 1.0 - std::exp(-dt / cfg.tau_v);
  s.v_body_x += (c.continuous[kChVx] - s.v_body_x) * kv;
  s.v_body_y += (c.continuous[kChVy] - s.v_body_y) * kv;
  s.omega_z += (c.continuous[kChOmegaZ] - s.omega_z) * kv;
  s.yaw += s.omega_z * dt;

  double cy = std::cos(s.yaw), sy = std::sin(s.yaw);
  double dx = (cy * s.v_body_x - sy * s.v_body_y) * dt;
  double dy = (sy * s.v_body_x + cy * s.v_body_y) * dt;
  double nx = s.x + dx, ny = s.y + dy;

  if (!field.in_extent(nx, ny)) {
    s.out_of_bounds = true;
    s.x = std::clamp(nx, 0.0, field.length_m);
    s.y = std::clamp(ny, 0.0, field.width_m);
    return s;
  }

  s.contact_force = cfg.contact_nominal;

  // step / wall check against nearest-cell surface heights so stair edges are
  // seen at full height
  double ground_old = surface_height(field, s.x, s.y);
  double ground_new = surface_height(field, nx, ny);
  double rise = ground_new - ground_old;
  bool moved = false;
  if (rise > cfg.wall_step) {
    // ramming an obstacle taller than the robot can address
    s.contact_force = cfg.collision_force;
    s.v_body_x = 0.0;
    s.v_body_y = 0.0;
  } else if (rise > cap.max_step) {
    // blocked by a step this gait cannot climb
    s.v_body_x = 0.0;
    s.v_body_y = 0.0;
  } else {
    if (rise < -cap.max_step) s.falling = true;  // drop beyond capability
    s.x = nx;
    s.y = ny;
    moved = true;
  }

  // unsupported-span tracking across gaps
  if (moved) {
    if (!is_supported(field, s.x, s.y)) {
      if (!s.over_gap) {
        s.over_gap = true;
        s.gap_entry_x = state.x;
        s.gap_entry_y = state.y;
      }
      double span = std::hypot(s.x - s.gap_entry_x, s.y - s.gap_entry_y);
      if (span > cap.max_span) s.falling = true;
      s.contact_force = 0.0;
    } else {
      s.over_gap = false;
    }
  }

  // lateral-slope tolerance, probed over a body-scale window
  {
    double probe = 0.15;
    double yl = std::clamp(s.y - probe, 0.0, field.width_m);
    double yr = std::clamp(s.y + probe, 0.0, field.width_m);
    if (yr - yl > 1e-6) {
      double slope =
          (query_height(field, s.x, yr) - query_height(field, s.x, yl)) /
          (yr - yl);
      if (std::atan(std::abs(slope)) > cap.max_tilt + 1e-9) s.falling = true;
    }
  }

  // body height tracks commanded height above the interpolated surface
  double ground_q = query_height(field, s.x, s.y);
  double target_z = ground_q + c.continuous[kChBodyHeight];
  double kz = 1.0 - std::exp(-dt / cfg.tau_z);
  s.z += (target_z - s.z) * kz;

  // phase clock and synthetic joint signals
  s.clock.frequency = c.continuous[kChGaitFreq];
  s.clock.gait = c.gait_index;
  s.clock = advance_phase(s.clock, dt);
  double speed = std::hypot(s.v_body_x, s.v_body_y);
  double qd_mag = 0.3 * s.clock.frequency + 0.5 * speed;
  auto phases = leg_phases(s.clock.phase, c.gait_embedding);
  ActionMapper nominal;
  for (int leg = 0; leg < kNumLegs; ++leg)
    for (int j = 0; j < 3; ++j) {
      int idx = leg * 3 + j;
      double osc = std::sin(2.0 * M_PI * phases[leg] + j);
      s.q[idx] = nominal.nominal_pose_q0[idx] + 0.1 * osc * speed;
      s.qd[idx] = qd_mag * osc;
    }
  return s;
}

}  // namespace quadnav

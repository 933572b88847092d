#pragma once

#include <array>
#include <cstdint>

#include "quadnav/decoder.hpp"
#include "quadnav/reward.hpp"
#include "quadnav/terrain.hpp"

namespace quadnav {

inline constexpr int kNumJoints = 12;
inline constexpr int kNumLegs = 4;
inline constexpr int kLowLevelObsDim = 3 + 12 + 12 + 12 + 12 + 15 + 4 + 4;  // 74

using JointVec = std::array<double, kNumJoints>;

struct ProprioState {
  std::array<double, 3> gravity_dir_body{0.0, 0.0, -1.0};  // unit
  JointVec joint_pos_err{};
  JointVec joint_vel{};
  std::array<double, 3> base_lin_vel{};
  std::array<double, 3> base_ang_vel{};
  double base_height = 0.0;
  double yaw = 0.0;
};

struct PhaseClock {
  double phase = 0.0;      // cycles, wraps in [0,1)
  double frequency = 2.0;  // Hz
  int gait = kTrot;
};

// phase' = fract(phase + f dt); throws std::domain_error for dt <= 0
PhaseClock advance_phase(PhaseClock clock, double dt);

// per-leg phases (FL, FR, RL, RR) from the base phase and the gait template
std::array<double, kNumLegs> leg_phases(double base_phase,
                                        const std::array<double, 3>& embedding);

struct ActionMapper {
  double a_max = 1.0;
  double scale_alpha = 0.25;
  JointVec nominal_pose_q0{0.0, 0.8, -1.6, 0.0, 0.8, -1.6,
                           0.0, 0.8, -1.6, 0.0, 0.8, -1.6};
};

// q* = q0 + alpha * clip(a, -a_max, a_max)
JointVec map_action(const JointVec& a, const ActionMapper& m);

struct LowLevelObs {
  std::array<double, kLowLevelObsDim> values{};
};

// fixed layout: [g^b(3), dq(12), qdot(12), a_{t-1}(12), a_{t-2}(12),
//                c(15), leg phases(4), gait one-hot(4)]
LowLevelObs build_obs(const ProprioState& prop, const JointVec& a_prev,
                      const JointVec& a_prev2, const CommandVector& c,
                      const PhaseClock& clock);

struct LowLevelRewardWeights {
  double lin = 1.0;
  double yaw = 0.5;
  double stab = -0.5;
  double smooth = -0.01;
  double energy = -0.001;
};

struct LowLevelConfig {
  double sigma_lin = 0.25;  // (m/s)^2
  double sigma_yaw = 0.25;  // (rad/s)^2
  LowLevelRewardWeights weights;
  ActionMapper mapper;
};

RewardBreakdown reward_lowlevel(const ProprioState& prop, const CommandVector& c,
                                const JointVec& a, const JointVec& a_prev,
                                const LowLevelConfig& cfg);

// --- deterministic gait-tracking surrogate ---

struct GaitCapability {
  double max_step = 0.0;  // climbable step height, m
  double max_span = 0.0;  // crossable unsupported span, m
  double max_tilt = 0.0;  // lateral-slope tolerance, rad
};

struct SurrogateConfig {
  double tau_v = 0.3;    // velocity tracking time constant, s
  double tau_z = 0.1;    // height tracking time constant, s
  double contact_nominal = 25.0;   // standing contact force, N
  double collision_force = 80.0;   // force reported when ramming an obstacle, N
  double wall_step = 0.4;          // rises above this are collisions, not steps
  double fall_depth = 1.0;         // height target drop once falling, m
  // indexed by gait: trot, pronk, pace, bound
  std::array<GaitCapability, kNumGaits> capability{{
      {0.25, 0.15, 0.30},   // trot: strong climber (diagonal support)
      {0.20, 0.25, 0.20},   // pronk
      {0.12, 0.10, 0.35},   // pace: best on lateral slopes
      {0.15, 0.60, 0.15},   // bound: strong gap crosser (paired propulsion)
  }};
};

struct RobotState {
  double x = 0.0, y = 0.0;  // base position, m
  double z = 0.0;           // absolute base height, m
  double yaw = 0.0;
  double v_body_x = 0.0, v_body_y = 0.0;  // tracked planar velocity, body frame
  double omega_z = 0.0;
  JointVec q{};
  JointVec qd{};
  PhaseClock clock;
  double contact_force = 0.0;  // synthetic scalar, N
  // failure bookkeeping
  bool falling = false;
  bool out_of_bounds = false;
  bool over_gap = false;
  double gap_entry_x = 0.0, gap_entry_y = 0.0;
};

// One physics sub-step of the kinematic executor. Pure function of its inputs.
RobotState surrogate_executor_step(const RobotState& state,
                                   const CommandVector& c, double dt,
                                   const HeightField& field,
                                   const SurrogateConfig& cfg);

// height of the walking surface under (x,y), nearest-cell
double surface_height(const HeightField& field, double x, double y);

}  // namespace quadnav

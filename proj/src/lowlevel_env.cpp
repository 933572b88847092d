#include "quadnav/lowlevel_env.hpp"

#include <algorithm>
#include <cmath>

namespace quadnav {

LowLevelToyEnv::LowLevelToyEnv(const RunConfig& cfg, int n_envs, uint64_t seed)
    : cfg_(cfg) {
  cfg_.resolve();
  states_.resize(n_envs);
  rngs_.reserve(n_envs);
  for (int i = 0; i < n_envs; ++i)
    rngs_.emplace_back(hash_mix(seed, static_cast<uint64_t>(i), 0x10e));
}

void LowLevelToyEnv::reset_env(int i) {
  EnvState& s = states_[i];
  Rng& rng = rngs_[i];
  s = EnvState{};
  s.q = cfg_.lowlevel.mapper.nominal_pose_q0;
  s.prop.base_height = 0.28;

  // random command within bounds, random gait
  HighLevelAction a;
  for (int j = 0; j < kActionDim; ++j) a.values[j] = rng.uniform(-1.0, 1.0);
  s.cmd = decode(a, cfg_.decoder.bounds, cfg_.decoder.a_max);
  s.clock.gait = s.cmd.gait_index;
  s.clock.frequency = s.cmd.continuous[kChGaitFreq];
  s.clock.phase = rng.uniform();
}

JointVec LowLevelToyEnv::reference_pose(const EnvState& s) const {
  auto phases = leg_phases(s.clock.phase, s.cmd.gait_embedding);
  JointVec ref = cfg_.lowlevel.mapper.nominal_pose_q0;
  double amp = 0.2;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    double ph = 2.0 * M_PI * phases[leg];
    ref[3 * leg + 1] += amp * std::sin(ph);   // thigh
    ref[3 * leg + 2] -= amp * std::cos(ph);   // calf
  }
  return ref;
}

LowLevelObs LowLevelToyEnv::make_obs(const EnvState& s) const {
  return build_obs(s.prop, s.a_prev, s.a_prev2, s.cmd, s.clock);
}

Eigen::MatrixXd LowLevelToyEnv::reset_all() {
  Eigen::MatrixXd out(kLowLevelObsDim, n_envs());
  for (int i = 0; i < n_envs(); ++i) {
    reset_env(i);
    LowLevelObs o = make_obs(states_[i]);
    for (int j = 0; j < kLowLevelObsDim; ++j) out(j, i) = o.values[j];
  }
  return out;
}

RolloutEnv::BatchResult LowLevelToyEnv::step(const Eigen::MatrixXd& actions) {
  int n = n_envs();
  BatchResult res;
  res.obs.resize(kLowLevelObsDim, n);
  res.rewards.resize(n);
  res.terminal.assign(n, 0);
  res.trunc.assign(n, 0);

  for (int i = 0; i < n; ++i) {
    EnvState& s = states_[i];
    JointVec a;
    for (int j = 0; j < kNumJoints; ++j) a[j] = actions(j, i);

    JointVec target = map_action(a, cfg_.lowlevel.mapper);
    JointVec ref = reference_pose(s);
    double err2 = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      double q_new = s.q[j] + 0.5 * (target[j] - s.q[j]);
      s.prop.joint_vel[j] = (q_new - s.q[j]) / kDt;
      s.q[j] = q_new;
      double e = s.q[j] - ref[j];
      err2 += e * e;
      s.prop.joint_pos_err[j] = s.q[j] - cfg_.lowlevel.mapper.nominal_pose_q0[j];
    }
    // attainable speed degrades with distance from the gait reference
    double alignment = std::exp(-4.0 * err2);
    double vx_star = s.cmd.continuous[kChVx] * alignment;
    double vy_star = s.cmd.continuous[kChVy] * alignment;
    double wz_star = s.cmd.continuous[kChOmegaZ] * alignment;
    double k = 1.0 - std::exp(-kDt / 0.1);
    s.prop.base_lin_vel[0] += k * (vx_star - s.prop.base_lin_vel[0]);
    s.prop.base_lin_vel[1] += k * (vy_star - s.prop.base_lin_vel[1]);
    s.prop.base_ang_vel[2] += k * (wz_star - s.prop.base_ang_vel[2]);
    s.clock = advance_phase(s.clock, kDt);

    RewardBreakdown rb = reward_lowlevel(s.prop, s.cmd, a, s.a_prev,
                                         cfg_.lowlevel);
    res.rewards[i] = rb.total;
    s.lin_reward_sum += rb.raw_of("lin");

    s.a_prev2 = s.a_prev;
    s.a_prev = a;
    ++s.t;

    if (s.t >= kEpisodeLen) {
      res.trunc[i] = 1;
      ++res.episodes_ended;
      if (s.lin_reward_sum / kEpisodeLen >= 0.5) ++res.successes;
      reset_env(i);
    }
    LowLevelObs o = make_obs(s);
    for (int j = 0; j < kLowLevelObsDim; ++j) res.obs(j, i) = o.values[j];
  }
  return res;
}

}  // namespace quadnav

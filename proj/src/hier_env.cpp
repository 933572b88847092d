#include "quadnav/hier_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace quadnav {

Env::Env(const RunConfig& cfg, int env_index, uint64_t run_seed)
    : cfg_(cfg),
      env_index_(env_index),
      rng_(hash_mix(run_seed, static_cast<uint64_t>(env_index), 0xe27)) {
  cfg_.resolve();
  for (const std::string& name : cfg_.env.families)
    families_.push_back(family_from_name(name));
  if (cfg_.curriculum.init == "uniform")
    level_ = static_cast<int>(rng_.uniform_int(cfg_.terrain.l_max));
}

void Env::set_level(int level) {
  if (level < 0 || level >= cfg_.terrain.l_max)
    throw std::domain_error("level out of range");
  level_ = level;
}

void Env::start_episode(int level, Family family, uint64_t tile_seed) {
  tile_ = sample_tile(cfg_.terrain, level, family, tile_seed);

  robot_ = RobotState{};
  double jx = rng_.uniform(-cfg_.env.start_jitter, cfg_.env.start_jitter);
  double jy = rng_.uniform(-cfg_.env.start_jitter, cfg_.env.start_jitter);
  robot_.x = tile_.start_pos.x + jx;
  robot_.y = tile_.start_pos.y + jy;
  robot_.z = query_height(tile_.field, robot_.x, robot_.y) + cfg_.reward.z_star;
  robot_.yaw = std::atan2(tile_.goal_pos.y - robot_.y, tile_.goal_pos.x - robot_.x);
  robot_.q = cfg_.lowlevel.mapper.nominal_pose_q0;
  robot_.contact_force = cfg_.surrogate.contact_nominal;

  t_ = 0;
  reached_ever_ = false;
  alive_ = true;
  first_step_ = true;
  a_prev_ = HighLevelAction{};
  cmd_prev_.fill(0.0);
  cmd_prev2_.fill(0.0);
}

HighLevelObs Env::reset() {
  Family family = families_[rng_.uniform_int(families_.size())];
  start_episode(level_, family, rng_.next_u64());
  return build_obs();
}

HighLevelObs Env::reset_fixed(int level, Family family, uint64_t tile_seed) {
  if (level < 0 || level >= cfg_.terrain.l_max)
    throw std::domain_error("level out of range");
  start_episode(level, family, tile_seed);
  return build_obs();
}

double Env::goal_distance() const {
  double gz = cfg_.reward.z_star;  // goal zone surface is flat at height 0
  double dx = robot_.x - tile_.goal_pos.x;
  double dy = robot_.y - tile_.goal_pos.y;
  double dz = robot_.z - gz;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

HighLevelObs Env::build_obs() const {
  HighLevelObs o;
  const HeightField& f = tile_.field;
  double ground = query_height(f, robot_.x, robot_.y);
  double d = goal_distance();
  double bearing =
      std::atan2(tile_.goal_pos.y - robot_.y, tile_.goal_pos.x - robot_.x) -
      robot_.yaw;
  int k = 0;
  o.values[k++] = d / 10.0;
  o.values[k++] = std::sin(bearing);
  o.values[k++] = std::cos(bearing);
  o.values[k++] = robot_.z - ground;
  o.values[k++] = robot_.v_body_x;
  o.values[k++] = robot_.v_body_y;
  o.values[k++] = robot_.omega_z;
  o.values[k++] = 0.0;  // g^b; the surrogate keeps the base level
  o.values[k++] = 0.0;
  o.values[k++] = -1.0;
  double cy = std::cos(robot_.yaw), sy = std::sin(robot_.yaw);
  for (double dist : cfg_.env.probes) {
    double px = robot_.x + cy * dist;
    double py = robot_.y + sy * dist;
    if (f.in_extent(px, py)) {
      o.values[k++] = query_height(f, px, py) - ground;
      o.values[k++] = is_supported(f, px, py) ? 1.0 : 0.0;
    } else {
      o.values[k++] = 0.0;
      o.values[k++] = 0.0;
    }
  }
  // previous command mapped back to [-1,1] per channel
  for (int j = 0; j < kContinuousDim; ++j) {
    const ChannelBound& b = cfg_.decoder.bounds.channels[j];
    double span = b.hi - b.lo;
    o.values[k++] = span > 0.0 ? 2.0 * (cmd_prev_[j] - b.lo) / span - 1.0 : 0.0;
  }
  for (int j = 0; j < 3; ++j) o.values[k++] = cmd_prev_[kContinuousDim + j];
  o.values[k++] = static_cast<double>(t_) / cfg_.env.t_max;
  if (k != kHighObsDim)
    throw std::runtime_error("high-level observation layout mismatch");
  return o;
}

StepResult Env::step(const HighLevelAction& a) {
  if (!alive_)
    throw std::runtime_error("step() on an environment that was never reset");

  CommandVector cmd = decode(a, cfg_.decoder.bounds, cfg_.decoder.a_max);
  for (int k = 0; k < cfg_.env.k_substeps; ++k)
    robot_ = surrogate_executor_step(robot_, cmd, cfg_.env.dt_phys, tile_.field,
                                     cfg_.surrogate);
  ++t_;

  const HeightField& f = tile_.field;
  double ground = query_height(f, robot_.x, robot_.y);
  double z_rel = robot_.z - ground;
  double d = goal_distance();

  // termination and reach events, then reward, then reset (fixed order)
  if (d < cfg_.env.reach_dist) reached_ever_ = true;
  bool failed = robot_.out_of_bounds || z_rel < cfg_.env.fall_height ||
                robot_.contact_force > cfg_.env.collision_force_th;
  bool timeout = !failed && t_ >= cfg_.env.t_max;

  auto cmd_flat = cmd.flat();
  if (first_step_) {
    // seed histories so smoothness terms read zero on the first step
    a_prev_ = a;
    cmd_prev_ = cmd_flat;
    cmd_prev2_ = cmd_flat;
    first_step_ = false;
  }

  HighLevelRewardConfig rcfg = cfg_.reward;
  if (!(rcfg.r_map > 0.0))
    rcfg.r_map = std::hypot(f.length_m, f.width_m);  // tile diagonal

  HighLevelRewardInputs in;
  in.d_t = d;
  in.t = t_;
  in.yaw = robot_.yaw;
  in.yaw_star =
      std::atan2(tile_.goal_pos.y - robot_.y, tile_.goal_pos.x - robot_.x);
  double planar = std::hypot(robot_.v_body_x, robot_.v_body_y);
  in.lin_vel_norm = planar;
  in.ang_vel_norm = std::abs(robot_.omega_z);
  double qd2 = 0.0;
  for (double v : robot_.qd) qd2 += v * v;
  in.joint_vel_norm = std::sqrt(qd2);
  in.z = z_rel;
  in.planar_speed = planar;
  in.contact_forces = {{0.0, 0.0, robot_.contact_force}};
  in.action = a.values;
  in.action_prev = a_prev_.values;
  in.cmd = cmd_flat;
  in.cmd_prev = cmd_prev_;
  in.cmd_prev2 = cmd_prev2_;

  StepResult res;
  res.breakdown = high_level_reward(in, rcfg);
  res.reward = res.breakdown.total;
  res.d_goal = d;

  if (recorder_) {
    TrajectoryRecord rec;
    rec.t = t_;
    rec.x = robot_.x;
    rec.y = robot_.y;
    rec.z = robot_.z;
    rec.yaw = robot_.yaw;
    rec.gait = cmd.gait_index;
    rec.cmd = cmd_flat;
    rec.reward = res.reward;
    rec.d_goal = d;
    recorder_->push_back(rec);
  }

  cmd_prev2_ = cmd_prev_;
  cmd_prev_ = cmd_flat;
  a_prev_ = a;

  if (failed || timeout) {
    res.terminated = failed;
    res.truncated = timeout;
    res.episode_end = true;
    res.success = reached_ever_;
    if (curriculum_enabled_) {
      window_.push_back(reached_ever_);
      if (static_cast<int>(window_.size()) >= cfg_.curriculum.window_len) {
        int c = static_cast<int>(
            std::count(window_.begin(), window_.end(), true));
        level_ = update_level(level_, c, cfg_.curriculum.window_len,
                              cfg_.curriculum.threshold_s, cfg_.terrain.l_max);
        window_.clear();
      }
    }
    res.obs = reset();
  } else {
    res.obs = build_obs();
  }
  return res;
}

VecEnv::VecEnv(const RunConfig& cfg, int n_envs, uint64_t run_seed, int workers)
    : workers_(std::max(1, workers)), l_max_(cfg.terrain.l_max) {
  envs_.reserve(n_envs);
  for (int i = 0; i < n_envs; ++i) envs_.emplace_back(cfg, i, run_seed);
}

std::vector<HighLevelObs> VecEnv::reset_all() {
  std::vector<HighLevelObs> out(envs_.size());
  for (size_t i = 0; i < envs_.size(); ++i) out[i] = envs_[i].reset();
  return out;
}

std::vector<StepResult> VecEnv::batch_step(
    const std::vector<HighLevelAction>& actions) {
  if (actions.size() != envs_.size())
    throw std::invalid_argument("action batch size mismatch");
  std::vector<StepResult> out(envs_.size());
  if (workers_ == 1) {
    for (size_t i = 0; i < envs_.size(); ++i) out[i] = envs_[i].step(actions[i]);
    return out;
  }
  int n = static_cast<int>(envs_.size());
  int w = std::min(workers_, n);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (int t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      for (int i = t; i < n; i += w) out[i] = envs_[i].step(actions[i]);
    });
  }
  for (std::thread& th : threads) th.join();
  return out;
}

double VecEnv::mean_level() const {
  double s = 0.0;
  for (const Env& e : envs_) s += e.level();
  return envs_.empty() ? 0.0 : s / envs_.size();
}

std::vector<int> VecEnv::level_histogram() const {
  std::vector<int> hist(l_max_, 0);
  for (const Env& e : envs_) ++hist[e.level()];
  return hist;
}

}  // namespace quadnav

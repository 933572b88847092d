#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quadnav/config.hpp"
#include "quadnav/curriculum.hpp"
#include "quadnav/decoder.hpp"
#include "quadnav/lowlevel.hpp"
#include "quadnav/reward.hpp"
#include "quadnav/rng.hpp"
#include "quadnav/terrain.hpp"

namespace quadnav {

// observation layout:
//   [d/10, sin(bearing), cos(bearing), z_rel,
//    v_body_x, v_body_y, omega_z, g^b (3),
//    5 probes x (rel height, supported),
//    prev command normalized (15), t/T_max]
inline constexpr int kHighObsDim = 1 + 2 + 1 + 3 + 3 + 10 + 15 + 1;

struct HighLevelObs {
  std::array<double, kHighObsDim> values{};
};

struct TrajectoryRecord {
  int t = 0;
  double x = 0, y = 0, z = 0, yaw = 0;
  int gait = 0;
  std::array<double, kCommandDim> cmd{};
  double reward = 0.0;
  double d_goal = 0.0;
};

struct StepResult {
  HighLevelObs obs;       // post-reset obs when the episode ended
  double reward = 0.0;
  RewardBreakdown breakdown;
  bool terminated = false;  // failure (fall / collision / out of bounds)
  bool truncated = false;   // timeout
  bool episode_end = false;
  bool success = false;     // reach latch, reported at episode end
  double d_goal = 0.0;
};

// One hierarchical episodic environment: decoder -> surrogate executor ->
// reward, with per-env curriculum level tracking and auto-reset.
class Env {
 public:
  Env(const RunConfig& cfg, int env_index, uint64_t run_seed);

  // Reset at the env's current curriculum level; family and tile seed drawn
  // from the per-env stream.
  HighLevelObs reset();
  // Deterministic reset used by evaluation: fixed level/family/seed, no
  // curriculum involvement.
  HighLevelObs reset_fixed(int level, Family family, uint64_t tile_seed);

  StepResult step(const HighLevelAction& a);

  int level() const { return level_; }
  void set_level(int level);
  void set_curriculum_enabled(bool on) { curriculum_enabled_ = on; }
  void set_recorder(std::vector<TrajectoryRecord>* rec) { recorder_ = rec; }

  const RobotState& robot() const { return robot_; }
  const TerrainTile& tile() const { return tile_; }
  double goal_distance() const;
  int step_index() const { return t_; }
  Family family() const { return tile_.family; }

 private:
  HighLevelObs build_obs() const;
  void start_episode(int level, Family family, uint64_t tile_seed);

  RunConfig cfg_;
  int env_index_ = 0;
  Rng rng_;
  std::vector<Family> families_;

  TerrainTile tile_;
  RobotState robot_;
  int t_ = 0;
  bool reached_ever_ = false;
  bool alive_ = false;
  bool curriculum_enabled_ = true;

  // per-env curriculum level + sliding success window
  int level_ = 0;
  std::vector<bool> window_;

  // reward histories (seeded with first observed values)
  bool first_step_ = true;
  HighLevelAction a_prev_{};
  std::array<double, kCommandDim> cmd_prev_{};
  std::array<double, kCommandDim> cmd_prev2_{};

  std::vector<TrajectoryRecord>* recorder_ = nullptr;
};

// Vectorized batch of independent environments. Stepping may fan out over
// worker threads; results are bit-identical for any worker count.
class VecEnv {
 public:
  VecEnv(const RunConfig& cfg, int n_envs, uint64_t run_seed, int workers = 1);

  std::vector<HighLevelObs> reset_all();
  // actions.size() must equal n_envs
  std::vector<StepResult> batch_step(const std::vector<HighLevelAction>& actions);

  int n_envs() const { return static_cast<int>(envs_.size()); }
  Env& env(int i) { return envs_[i]; }
  double mean_level() const;
  std::vector<int> level_histogram() const;

 private:
  std::vector<Env> envs_;
  int workers_ = 1;
  int l_max_ = 10;
};

}  // namespace quadnav

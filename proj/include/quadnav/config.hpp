#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadnav/curriculum.hpp"
#include "quadnav/decoder.hpp"
#include "quadnav/lowlevel.hpp"
#include "quadnav/reward.hpp"
#include "quadnav/terrain.hpp"

namespace quadnav {

struct DecoderConfig {
  double a_max = 1.0;
  CommandBounds bounds = CommandBounds::defaults();
};

struct EnvConfig {
  int k_substeps = 10;
  double dt_phys = 0.02;  // s
  int t_max = 150;        // decision steps
  double fall_height = 0.15;       // m above local surface
  double collision_force_th = 40.0;  // N
  double reach_dist = 0.5;         // m
  std::vector<double> probes{0.2, 0.4, 0.6, 0.9, 1.2};  // m ahead
  std::vector<std::string> families{"rough", "pillar", "stair", "gap", "tilt"};
  double start_jitter = 0.15;  // m, uniform jitter of the spawn point

  double step_dt() const { return k_substeps * dt_phys; }
};

struct TrainerConfig {
  int n_envs = 100;
  int max_iterations = 20000;
  uint64_t seed = 42;
  int rollout_t = 24;
  double lr = 1e-4;
  double entropy_coef = 1e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int epochs = 5;
  int minibatches = 4;
  int hidden = 128;
  double value_coef = 0.5;
  double grad_clip = 1.0;
  double log_std_init = -0.5;
  int workers = 1;
  int checkpoint_every = 500;

  void validate() const;  // throws std::runtime_error
};

struct RunConfig {
  TerrainConfig terrain;
  DecoderConfig decoder;
  SurrogateConfig surrogate;
  LowLevelConfig lowlevel;
  HighLevelRewardConfig reward;  // step_dt / t_max derived from env on load
  CurriculumConfig curriculum;
  EnvConfig env;
  TrainerConfig trainer;

  nlohmann::json to_json() const;
  // Strict parse: unknown keys anywhere reject the whole config.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  // FNV-1a over the canonical serialized form.
  uint64_t hash() const;

  // sync derived fields (reward.step_dt, reward.t_max, curriculum.l_max)
  void resolve();
  void validate() const;
};

}  // namespace quadnav

#include "quadnav/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace quadnav {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key()))
      throw std::runtime_error("unknown config key '" + it.key() + "' in " + where);
}

template <typename T>
void get_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json terrain_to_json(const TerrainConfig& t) {
  return json{
      {"length_m", t.length_m},
      {"width_m", t.width_m},
      {"cell_size", t.cell_size},
      {"start_safety_radius", t.start_safety_radius},
      {"goal_radius", t.goal_radius},
      {"transition_band", t.transition_band},
      {"l_max", t.l_max},
      {"rough", {{"a_min", t.rough.a_min}, {"a_max", t.rough.a_max},
                 {"noise_cell", t.rough.noise_cell}}},
      {"pillar", {{"n_min", t.pillar.n_min}, {"n_max", t.pillar.n_max},
                  {"radius", t.pillar.radius}, {"height", t.pillar.height}}},
      {"stair", {{"h_min", t.stair.h_min}, {"h_max", t.stair.h_max},
                 {"run", t.stair.run}}},
      {"gap", {{"w_min", t.gap.w_min}, {"w_max", t.gap.w_max},
               {"max_gaps", t.gap.max_gaps}}},
      {"tilt", {{"theta_min", t.tilt.theta_min}, {"theta_max", t.tilt.theta_max}}},
  };
}

TerrainConfig terrain_from_json(const json& j) {
  TerrainConfig t;
  check_keys(j, "terrain",
             {"length_m", "width_m", "cell_size", "start_safety_radius",
              "goal_radius", "transition_band", "l_max", "rough", "pillar",
              "stair", "gap", "tilt"});
  get_opt(j, "length_m", t.length_m);
  get_opt(j, "width_m", t.width_m);
  get_opt(j, "cell_size", t.cell_size);
  get_opt(j, "start_safety_radius", t.start_safety_radius);
  get_opt(j, "goal_radius", t.goal_radius);
  get_opt(j, "transition_band", t.transition_band);
  get_opt(j, "l_max", t.l_max);
  if (j.contains("rough")) {
    const json& r = j.at("rough");
    check_keys(r, "terrain.rough", {"a_min", "a_max", "noise_cell"});
    get_opt(r, "a_min", t.rough.a_min);
    get_opt(r, "a_max", t.rough.a_max);
    get_opt(r, "noise_cell", t.rough.noise_cell);
  }
  if (j.contains("pillar")) {
    const json& r = j.at("pillar");
    check_keys(r, "terrain.pillar", {"n_min", "n_max", "radius", "height"});
    get_opt(r, "n_min", t.pillar.n_min);
    get_opt(r, "n_max", t.pillar.n_max);
    get_opt(r, "radius", t.pillar.radius);
    get_opt(r, "height", t.pillar.height);
  }
  if (j.contains("stair")) {
    const json& r = j.at("stair");
    check_keys(r, "terrain.stair", {"h_min", "h_max", "run"});
    get_opt(r, "h_min", t.stair.h_min);
    get_opt(r, "h_max", t.stair.h_max);
    get_opt(r, "run", t.stair.run);
  }
  if (j.contains("gap")) {
    const json& r = j.at("gap");
    check_keys(r, "terrain.gap", {"w_min", "w_max", "max_gaps"});
    get_opt(r, "w_min", t.gap.w_min);
    get_opt(r, "w_max", t.gap.w_max);
    get_opt(r, "max_gaps", t.gap.max_gaps);
  }
  if (j.contains("tilt")) {
    const json& r = j.at("tilt");
    check_keys(r, "terrain.tilt", {"theta_min", "theta_max"});
    get_opt(r, "theta_min", t.tilt.theta_min);
    get_opt(r, "theta_max", t.tilt.theta_max);
  }
  return t;
}

json decoder_to_json(const DecoderConfig& d) {
  json channels = json::array();
  for (const ChannelBound& c : d.bounds.channels)
    channels.push_back({{"name", c.name}, {"lo", c.lo}, {"hi", c.hi}});
  return json{{"a_max", d.a_max}, {"channels", channels}};
}

DecoderConfig decoder_from_json(const json& j) {
  DecoderConfig d;
  check_keys(j, "decoder", {"a_max", "channels"});
  get_opt(j, "a_max", d.a_max);
  if (j.contains("channels")) {
    d.bounds.channels.clear();
    for (const json& c : j.at("channels")) {
      check_keys(c, "decoder.channels[]", {"name", "lo", "hi"});
      d.bounds.channels.push_back({c.at("name").get<std::string>(),
                                   c.at("lo").get<double>(),
                                   c.at("hi").get<double>()});
    }
  }
  return d;
}

json surrogate_to_json(const SurrogateConfig& s) {
  json caps = json::object();
  for (int g = 0; g < kNumGaits; ++g)
    caps[gait_name(g)] = {{"max_step", s.capability[g].max_step},
                          {"max_span", s.capability[g].max_span},
                          {"max_tilt", s.capability[g].max_tilt}};
  return json{{"tau_v", s.tau_v},
              {"tau_z", s.tau_z},
              {"contact_nominal", s.contact_nominal},
              {"collision_force", s.collision_force},
              {"wall_step", s.wall_step},
              {"fall_depth", s.fall_depth},
              {"capability", caps}};
}

SurrogateConfig surrogate_from_json(const json& j) {
  SurrogateConfig s;
  check_keys(j, "surrogate",
             {"tau_v", "tau_z", "contact_nominal", "collision_force",
              "wall_step", "fall_depth", "capability"});
  get_opt(j, "tau_v", s.tau_v);
  get_opt(j, "tau_z", s.tau_z);
  get_opt(j, "contact_nominal", s.contact_nominal);
  get_opt(j, "collision_force", s.collision_force);
  get_opt(j, "wall_step", s.wall_step);
  get_opt(j, "fall_depth", s.fall_depth);
  if (j.contains("capability")) {
    const json& caps = j.at("capability");
    check_keys(caps, "surrogate.capability", {"trot", "pronk", "pace", "bound"});
    for (int g = 0; g < kNumGaits; ++g) {
      if (!caps.contains(gait_name(g))) continue;
      const json& c = caps.at(gait_name(g));
      check_keys(c, "surrogate.capability." + gait_name(g),
                 {"max_step", "max_span", "max_tilt"});
      get_opt(c, "max_step", s.capability[g].max_step);
      get_opt(c, "max_span", s.capability[g].max_span);
      get_opt(c, "max_tilt", s.capability[g].max_tilt);
    }
  }
  return s;
}

json lowlevel_to_json(const LowLevelConfig& l) {
  return json{
      {"sigma_lin", l.sigma_lin},
      {"sigma_yaw", l.sigma_yaw},
      {"weights", {{"lin", l.weights.lin}, {"yaw", l.weights.yaw},
                   {"stab", l.weights.stab}, {"smooth", l.weights.smooth},
                   {"energy", l.weights.energy}}},
      {"mapper", {{"a_max", l.mapper.a_max}, {"alpha", l.mapper.scale_alpha}}},
  };
}

LowLevelConfig lowlevel_from_json(const json& j) {
  LowLevelConfig l;
  check_keys(j, "lowlevel", {"sigma_lin", "sigma_yaw", "weights", "mapper"});
  get_opt(j, "sigma_lin", l.sigma_lin);
  get_opt(j, "sigma_yaw", l.sigma_yaw);
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    check_keys(w, "lowlevel.weights", {"lin", "yaw", "stab", "smooth", "energy"});
    get_opt(w, "lin", l.weights.lin);
    get_opt(w, "yaw", l.weights.yaw);
    get_opt(w, "stab", l.weights.stab);
    get_opt(w, "smooth", l.weights.smooth);
    get_opt(w, "energy", l.weights.energy);
  }
  if (j.contains("mapper")) {
    const json& m = j.at("mapper");
    check_keys(m, "lowlevel.mapper", {"a_max", "alpha"});
    get_opt(m, "a_max", l.mapper.a_max);
    get_opt(m, "alpha", l.mapper.scale_alpha);
  }
  return l;
}

json reward_to_json(const HighLevelRewardConfig& r) {
  const HighLevelRewardWeights& w = r.weights;
  return json{
      {"weights",
       {{"goal_dist", w.goal_dist}, {"face", w.face}, {"arrive", w.arrive},
        {"stable", w.stable}, {"action_rate", w.action_rate},
        {"cmd_sm1", w.cmd_sm1}, {"cmd_sm2", w.cmd_sm2}, {"col", w.col},
        {"lazy", w.lazy}, {"alive", w.alive}}},
      {"r_map", r.r_map},
      {"shape_a", r.shape_a},
      {"shape_b", r.shape_b},
      {"d0", r.d0},
      {"b0", r.b0},
      {"b1", r.b1},
      {"sigma_z", r.sigma_z},
      {"z_star", r.z_star},
      {"beta", r.beta},
      {"f_th", r.f_th},
      {"v_th", r.v_th},
  };
}

HighLevelRewardConfig reward_from_json(const json& j) {
  HighLevelRewardConfig r;
  check_keys(j, "reward",
             {"weights", "r_map", "shape_a", "shape_b", "d0", "b0", "b1",
              "sigma_z", "z_star", "beta", "f_th", "v_th"});
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    check_keys(w, "reward.weights",
               {"goal_dist", "face", "arrive", "stable", "action_rate",
                "cmd_sm1", "cmd_sm2", "col", "lazy", "alive"});
    get_opt(w, "goal_dist", r.weights.goal_dist);
    get_opt(w, "face", r.weights.face);
    get_opt(w, "arrive", r.weights.arrive);
    get_opt(w, "stable", r.weights.stable);
    get_opt(w, "action_rate", r.weights.action_rate);
    get_opt(w, "cmd_sm1", r.weights.cmd_sm1);
    get_opt(w, "cmd_sm2", r.weights.cmd_sm2);
    get_opt(w, "col", r.weights.col);
    get_opt(w, "lazy", r.weights.lazy);
    get_opt(w, "alive", r.weights.alive);
  }
  get_opt(j, "r_map", r.r_map);
  get_opt(j, "shape_a", r.shape_a);
  get_opt(j, "shape_b", r.shape_b);
  get_opt(j, "d0", r.d0);
  get_opt(j, "b0", r.b0);
  get_opt(j, "b1", r.b1);
  get_opt(j, "sigma_z", r.sigma_z);
  get_opt(j, "z_star", r.z_star);
  get_opt(j, "beta", r.beta);
  get_opt(j, "f_th", r.f_th);
  get_opt(j, "v_th", r.v_th);
  return r;
}

json curriculum_to_json(const CurriculumConfig& c) {
  return json{{"window_len", c.window_len},
              {"threshold_s", c.threshold_s},
              {"init", c.init}};
}

CurriculumConfig curriculum_from_json(const json& j) {
  CurriculumConfig c;
  check_keys(j, "curriculum", {"window_len", "threshold_s", "init"});
  get_opt(j, "window_len", c.window_len);
  get_opt(j, "threshold_s", c.threshold_s);
  get_opt(j, "init", c.init);
  return c;
}

json env_to_json(const EnvConfig& e) {
  return json{{"k_substeps", e.k_substeps},
              {"dt_phys", e.dt_phys},
              {"t_max", e.t_max},
              {"fall_height", e.fall_height},
              {"collision_force_th", e.collision_force_th},
              {"reach_dist", e.reach_dist},
              {"probes", e.probes},
              {"families", e.families},
              {"start_jitter", e.start_jitter}};
}

EnvConfig env_from_json(const json& j) {
  EnvConfig e;
  check_keys(j, "env",
             {"k_substeps", "dt_phys", "t_max", "fall_height",
              "collision_force_th", "reach_dist", "probes", "families",
              "start_jitter"});
  get_opt(j, "k_substeps", e.k_substeps);
  get_opt(j, "dt_phys", e.dt_phys);
  get_opt(j, "t_max", e.t_max);
  get_opt(j, "fall_height", e.fall_height);
  get_opt(j, "collision_force_th", e.collision_force_th);
  get_opt(j, "reach_dist", e.reach_dist);
  get_opt(j, "probes", e.probes);
  get_opt(j, "families", e.families);
  get_opt(j, "start_jitter", e.start_jitter);
  return e;
}

json trainer_to_json(const TrainerConfig& t) {
  return json{{"n_envs", t.n_envs},
              {"max_iterations", t.max_iterations},
              {"seed", t.seed},
              {"rollout_t", t.rollout_t},
              {"lr", t.lr},
              {"entropy_coef", t.entropy_coef},
              {"gamma", t.gamma},
              {"gae_lambda", t.gae_lambda},
              {"clip_eps", t.clip_eps},
              {"epochs", t.epochs},
              {"minibatches", t.minibatches},
              {"hidden", t.hidden},
              {"value_coef", t.value_coef},
              {"grad_clip", t.grad_clip},
              {"log_std_init", t.log_std_init},
              {"workers", t.workers},
              {"checkpoint_every", t.checkpoint_every}};
}

TrainerConfig trainer_from_json(const json& j) {
  TrainerConfig t;
  check_keys(j, "trainer",
             {"n_envs", "max_iterations", "seed", "rollout_t", "lr",
              "entropy_coef", "gamma", "gae_lambda", "clip_eps", "epochs",
              "minibatches", "hidden", "value_coef", "grad_clip",
              "log_std_init", "workers", "checkpoint_every"});
  get_opt(j, "n_envs", t.n_envs);
  get_opt(j, "max_iterations", t.max_iterations);
  get_opt(j, "seed", t.seed);
  get_opt(j, "rollout_t", t.rollout_t);
  get_opt(j, "lr", t.lr);
  get_opt(j, "entropy_coef", t.entropy_coef);
  get_opt(j, "gamma", t.gamma);
  get_opt(j, "gae_lambda", t.gae_lambda);
  get_opt(j, "clip_eps", t.clip_eps);
  get_opt(j, "epochs", t.epochs);
  get_opt(j, "minibatches", t.minibatches);
  get_opt(j, "hidden", t.hidden);
  get_opt(j, "value_coef", t.value_coef);
  get_opt(j, "grad_clip", t.grad_clip);
  get_opt(j, "log_std_init", t.log_std_init);
  get_opt(j, "workers", t.workers);
  get_opt(j, "checkpoint_every", t.checkpoint_every);
  return t;
}

}  // namespace

void TrainerConfig::validate() const {
  if (n_envs < 1 || rollout_t < 1 || epochs < 1 || minibatches < 1 || hidden < 1)
    throw std::runtime_error("trainer sizes must be positive");
  if (!(lr > 0.0)) throw std::runtime_error("lr must be positive");
  if (!(clip_eps > 0.0 && clip_eps < 1.0))
    throw std::runtime_error("clip_eps must be in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::runtime_error("gamma must be in (0,1)");
  if (!(gae_lambda > 0.0 && gae_lambda < 1.0))
    throw std::runtime_error("gae_lambda must be in (0,1)");
  if (workers < 1) throw std::runtime_error("workers must be >= 1");
  if (n_envs % minibatches != 0)
    throw std::runtime_error("n_envs must be divisible by minibatches");
}

json RunConfig::to_json() const {
  return json{{"terrain", terrain_to_json(terrain)},
              {"decoder", decoder_to_json(decoder)},
              {"surrogate", surrogate_to_json(surrogate)},
              {"lowlevel", lowlevel_to_json(lowlevel)},
              {"reward", reward_to_json(reward)},
              {"curriculum", curriculum_to_json(curriculum)},
              {"env", env_to_json(env)},
              {"trainer", trainer_to_json(trainer)}};
}

RunConfig RunConfig::from_json(const json& j) {
  check_keys(j, "(root)",
             {"terrain", "decoder", "surrogate", "lowlevel", "reward",
              "curriculum", "env", "trainer"});
  RunConfig c;
  if (j.contains("terrain")) c.terrain = terrain_from_json(j.at("terrain"));
  if (j.contains("decoder")) c.decoder = decoder_from_json(j.at("decoder"));
  if (j.contains("surrogate")) c.surrogate = surrogate_from_json(j.at("surrogate"));
  if (j.contains("lowlevel")) c.lowlevel = lowlevel_from_json(j.at("lowlevel"));
  if (j.contains("reward")) c.reward = reward_from_json(j.at("reward"));
  if (j.contains("curriculum")) c.curriculum = curriculum_from_json(j.at("curriculum"));
  if (j.contains("env")) c.env = env_from_json(j.at("env"));
  if (j.contains("trainer")) c.trainer = trainer_from_json(j.at("trainer"));
  c.resolve();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return from_json(json::parse(in));
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config " + path);
  out << to_json().dump(2) << "\n";
}

uint64_t RunConfig::hash() const {
  std::string s = to_json().dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void RunConfig::resolve() {
  reward.step_dt = env.step_dt();
  reward.t_max = env.t_max;
  curriculum.l_max = terrain.l_max;
  if (reward.d0 != env.reach_dist) reward.d0 = env.reach_dist;
}

void RunConfig::validate() const {
  decoder.bounds.validate();
  curriculum.validate();
  trainer.validate();
  reward.validate();
  if (env.k_substeps < 1 || !(env.dt_phys > 0.0) || env.t_max < 1)
    throw std::runtime_error("invalid env timing configuration");
  if (env.families.empty())
    throw std::runtime_error("env.families must not be empty");
  for (const std::string& f : env.families) family_from_name(f);
}

}  // namespace quadnav

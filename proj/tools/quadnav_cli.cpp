#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadnav/config.hpp"
#include "quadnav/eval.hpp"
#include "quadnav/lowlevel_env.hpp"
#include "quadnav/ppo.hpp"
#include "quadnav/terrain.hpp"

namespace fs = std::filesystem;
using namespace quadnav;

namespace {

// exit codes: 0 ok, 1 usage, 2 config error, 3 runtime failure
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) {
    RunConfig cfg;
    cfg.resolve();
    return cfg;
  }
  return RunConfig::load(path);
}

int cmd_gen_terrain(const std::string& config_path, const std::string& family,
                    int level, uint64_t seed, const std::string& out,
                    const std::string& pgm) {
  RunConfig cfg = load_config_or_default(config_path);
  Family fam = family_from_name(family);
  if (level < 1 || level > cfg.terrain.l_max) {
    std::cerr << "error: level must be in [1, " << cfg.terrain.l_max << "]\n";
    return kExitUsage;
  }
  TerrainTile tile = sample_tile(cfg.terrain, level - 1, fam, seed);
  save_heightfield(tile.field, out, fam, level - 1, seed);
  std::cout << "wrote " << out << " (" << tile.field.nx << "x" << tile.field.ny
            << " cells, param " << tile.field.realized_param << ")\n";
  if (!pgm.empty()) {
    save_heightfield_pgm(tile.field, pgm);
    std::cout << "wrote " << pgm << "\n";
  }
  return 0;
}

int cmd_decode_probe() {
  std::cout << "gait quantizer bins over the raw channel value x_g:\n";
  const char* ranges[] = {"[-1.0, -0.5)", "[-0.5,  0.0)", "[ 0.0,  0.5)",
                          "[ 0.5,  1.0]"};
  for (int g = 0; g < kNumGaits; ++g)
    std::cout << "  " << ranges[g] << " -> " << g << " (" << gait_name(g)
              << "), bin center "
              << gait_bin_center(static_cast<Gait>(g)) << "\n";
  std::cout << "continuous channels (raw [-1,1] -> [lo, hi]):\n";
  CommandBounds bounds = CommandBounds::defaults();
  for (int j = 0; j < kContinuousDim; ++j) {
    const ChannelBound& b = bounds.channels[j];
    std::cout << "  " << j << ": " << b.name << " [" << b.lo << ", " << b.hi
              << "]\n";
  }
  std::cout << "channel 12: gait selector (quantized as above)\n";
  return 0;
}

int cmd_decode_action(const std::vector<double>& raw) {
  RunConfig cfg;
  HighLevelAction a;
  for (int j = 0; j < kActionDim; ++j) a.values[j] = raw[j];
  CommandVector c = decode(a, cfg.decoder.bounds, cfg.decoder.a_max);
  for (int j = 0; j < kContinuousDim; ++j)
    std::cout << cfg.decoder.bounds.channels[j].name << " = "
              << c.continuous[j] << "\n";
  std::cout << "gait = " << c.gait_index << " (" << gait_name(c.gait_index)
            << ")\n";
  return 0;
}

std::unique_ptr<EvalPolicy> make_policy(const RunConfig& cfg,
                                        const std::string& checkpoint,
                                        bool greedy, const std::string& gait,
                                        bool ignore_hash,
                                        std::unique_ptr<PolicyNet>& net_out) {
  if (greedy || checkpoint.empty()) {
    Gait g = kTrot;
    for (int i = 0; i < kNumGaits; ++i)
      if (gait_name(i) == gait) g = static_cast<Gait>(i);
    return std::make_unique<GreedyEvalPolicy>(g);
  }
  CheckpointData d = read_checkpoint(checkpoint);
  if (!ignore_hash && d.config_hash != cfg.hash()) {
    throw std::runtime_error(
        "checkpoint was trained with a different config (hash " +
        std::to_string(d.config_hash) + " vs " + std::to_string(cfg.hash()) +
        "); pass the run's config.json or --ignore-hash");
  }
  net_out = std::make_unique<PolicyNet>(d.obs_dim, d.act_dim, d.hidden,
                                        cfg.trainer.log_std_init,
                                        cfg.trainer.seed);
  net_out->params() = d.params;
  return std::make_unique<NetEvalPolicy>(*net_out);
}

void export_jsonl(const fs::path& src, const fs::path& dst,
                  const std::string& schema) {
  std::ofstream out(dst);
  if (!out) throw std::runtime_error("cannot write " + dst.string());
  out << nlohmann::json{{"schema", schema}, {"version", 1}}.dump() << "\n";
  if (fs::exists(src)) {
    std::ifstream in(src);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      // drop a pre-existing header so the export carries exactly one
      if (first && line.find("\"schema\"") != std::string::npos) {
        first = false;
        continue;
      }
      first = false;
      out << line << "\n";
    }
  }
  std::cout << "wrote " << dst.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadnav: terrain curriculum, hierarchical training, and "
               "evaluation toolkit"};
  app.require_subcommand(0, 1);

  bool print_defaults = false;
  app.add_flag("--print-config", print_defaults,
               "print the full default config and exit");

  // gen-terrain
  auto* gen = app.add_subcommand("gen-terrain", "generate one terrain tile");
  std::string g_config, g_family = "rough", g_out = "tile.bin", g_pgm;
  int g_level = 1;
  uint64_t g_seed = 0;
  gen->add_option("--config", g_config, "config file (defaults used if absent)");
  gen->add_option("--family", g_family,
                  "terrain family: rough|pillar|stair|gap|tilt");
  gen->add_option("--level", g_level, "difficulty level (1-based)");
  gen->add_option("--seed", g_seed, "tile seed");
  gen->add_option("--out", g_out, "output heightfield path");
  gen->add_option("--pgm", g_pgm, "also write a grayscale preview");

  // train
  auto* train = app.add_subcommand("train", "run the trainer");
  std::string t_config, t_out = "runs/default", t_resume;
  int t_envs = -1, t_iters = -1, t_workers = -1;
  int64_t t_seed = -1;
  bool t_lowlevel = false, t_print = false;
  train->add_option("--config", t_config, "config file");
  train->add_option("--out", t_out, "run directory");
  train->add_option("--resume", t_resume, "checkpoint to resume from");
  train->add_option("--seed", t_seed, "override trainer seed");
  train->add_option("--envs", t_envs, "override number of environments");
  train->add_option("--iters", t_iters, "override iteration count");
  train->add_option("--workers", t_workers, "override rollout worker threads");
  train->add_flag("--low-level", t_lowlevel,
                  "train the joint-level toy task instead of navigation");
  train->add_flag("--print-config", t_print,
                  "print the effective config and exit");

  // eval
  auto* ev = app.add_subcommand("eval", "run the evaluation protocol");
  std::string e_config, e_ckpt, e_out = "eval_report.json", e_traj,
              e_gait = "trot", e_forced;
  std::vector<std::string> e_families{"rough", "pillar", "stair", "gap",
                                      "tilt"};
  std::vector<int> e_levels{6, 7, 8, 9, 10};
  int e_episodes = 100;
  uint64_t e_seed = 7;
  bool e_greedy = false, e_ignore_hash = false;
  ev->add_option("--config", e_config, "config file");
  ev->add_option("--checkpoint", e_ckpt, "policy checkpoint");
  ev->add_flag("--greedy", e_greedy, "use the built-in goal-seeking policy");
  ev->add_option("--gait", e_gait, "gait for the built-in policy");
  ev->add_option("--forced-gait", e_forced,
                 "override the gait channel for any policy");
  ev->add_option("--families", e_families, "families to evaluate");
  ev->add_option("--levels", e_levels, "levels to evaluate (1-based)");
  ev->add_option("--episodes", e_episodes, "episodes per (family, level)");
  ev->add_option("--seed", e_seed, "evaluation seed");
  ev->add_option("--out", e_out, "report output path");
  ev->add_option("--trajectories", e_traj, "also export step trajectories");
  ev->add_flag("--ignore-hash", e_ignore_hash,
               "skip the checkpoint/config hash check");

  // decode
  auto* dec = app.add_subcommand("decode", "inspect the command decoder");
  bool d_probe = false;
  std::vector<double> d_action;
  dec->add_flag("--probe", d_probe, "print bin edges and channel mapping");
  dec->add_option("--action", d_action, "decode one raw 13-dim action")
      ->expected(kActionDim);

  // export
  auto* ex = app.add_subcommand("export", "export run artifacts");
  std::string x_run, x_out = ".";
  ex->add_option("--run", x_run, "run directory")->required();
  ex->add_option("--out", x_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (print_defaults) {
      RunConfig cfg;
      cfg.resolve();
      std::cout << cfg.to_json().dump(2) << "\n";
      return 0;
    }
    if (gen->parsed())
      return cmd_gen_terrain(g_config, g_family, g_level, g_seed, g_out, g_pgm);

    if (train->parsed()) {
      RunConfig cfg;
      try {
        cfg = load_config_or_default(t_config);
        if (t_seed >= 0) cfg.trainer.seed = static_cast<uint64_t>(t_seed);
        if (t_envs > 0) cfg.trainer.n_envs = t_envs;
        if (t_iters > 0) cfg.trainer.max_iterations = t_iters;
        if (t_workers > 0) cfg.trainer.workers = t_workers;
        cfg.resolve();
        cfg.validate();
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      if (t_print) {
        std::cout << cfg.to_json().dump(2) << "\n";
        return 0;
      }
      std::unique_ptr<RolloutEnv> env;
      if (t_lowlevel)
        env = std::make_unique<LowLevelToyEnv>(cfg, cfg.trainer.n_envs,
                                               cfg.trainer.seed);
      else
        env = std::make_unique<HierRolloutEnv>(cfg, cfg.trainer.n_envs,
                                               cfg.trainer.seed,
                                               cfg.trainer.workers);
      Trainer trainer(cfg, std::move(env), t_out);
      if (!t_resume.empty()) {
        int it = trainer.load_checkpoint(t_resume);
        std::cout << "resumed from iteration " << it << "\n";
      }
      trainer.train();
      std::cout << "run complete: " << t_out << "\n";
      return 0;
    }

    if (ev->parsed()) {
      RunConfig cfg;
      try {
        cfg = load_config_or_default(e_config);
        cfg.resolve();
        cfg.validate();
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      std::vector<Family> families;
      for (const auto& f : e_families) families.push_back(family_from_name(f));
      std::vector<int> levels;
      for (int l : e_levels) {
        if (l < 1 || l > cfg.terrain.l_max) {
          std::cerr << "error: level " << l << " out of range\n";
          return kExitUsage;
        }
        levels.push_back(l - 1);
      }
      std::unique_ptr<PolicyNet> net;
      auto policy = make_policy(cfg, e_ckpt, e_greedy, e_gait, e_ignore_hash,
                                net);
      int forced = -1;
      if (!e_forced.empty())
        for (int i = 0; i < kNumGaits; ++i)
          if (gait_name(i) == e_forced) forced = i;
      std::vector<TrajectoryRecord> traj;
      EvalReport report =
          evaluate(cfg, *policy, families, levels, e_episodes, e_seed, forced,
                   e_traj.empty() ? nullptr : &traj);
      report.save(e_out);
      if (!e_traj.empty()) write_trajectories(e_traj, traj);
      std::cout << "episodes: " << report.episodes.size()
                << "  mean success (episodes): " << report.mean_over_episodes()
                << "  mean success (cells): " << report.mean_over_cells()
                << "\n";
      std::cout << "wrote " << e_out << "\n";
      return 0;
    }

    if (dec->parsed()) {
      if (d_probe) return cmd_decode_probe();
      if (!d_action.empty()) return cmd_decode_action(d_action);
      std::cerr << "decode: pass --probe or --action\n";
      return kExitUsage;
    }

    if (ex->parsed()) {
      fs::path run(x_run), out(x_out);
      if (!fs::exists(run)) {
        std::cerr << "error: run directory " << x_run << " does not exist\n";
        return kExitUsage;
      }
      fs::create_directories(out);
      export_jsonl(run / "metrics.jsonl", out / "metrics.jsonl",
                   "quadnav.metrics");
      export_jsonl(run / "trajectories.jsonl", out / "trajectories.jsonl",
                   "quadnav.trajectory");
      return 0;
    }

    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

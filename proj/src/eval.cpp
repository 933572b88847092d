#include "quadnav/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace quadnav {

NetEvalPolicy::NetEvalPolicy(const PolicyNet& net) : net_(net) {
  h_ = Eigen::MatrixXd::Zero(net_.hidden(), 1);
}

void NetEvalPolicy::reset() { h_.setZero(); }

HighLevelAction NetEvalPolicy::act(const HighLevelObs& obs) {
  Eigen::MatrixXd X(net_.obs_dim(), 1);
  for (int j = 0; j < net_.obs_dim(); ++j) X(j, 0) = obs.values[j];
  Eigen::MatrixXd mu, Hn;
  net_.forward(X, h_, &mu, nullptr, &Hn, nullptr);
  h_ = Hn;
  HighLevelAction a;
  for (int j = 0; j < kActionDim; ++j) a.values[j] = mu(j, 0);
  return a;
}

double gait_bin_center(Gait gait) {
  // quantizer bins over [-1, 1] in gait order
  return -0.75 + 0.5 * static_cast<int>(gait);
}

GreedyEvalPolicy::GreedyEvalPolicy(Gait gait) : gait_raw_(gait_bin_center(gait)) {}

HighLevelAction GreedyEvalPolicy::act(const HighLevelObs& obs) {
  double sb = obs.values[1], cb = obs.values[2];
  double bearing = std::atan2(sb, cb);
  HighLevelAction a;
  a.values[kChVx] = std::max(0.1, cb);
  a.values[kChOmegaZ] = std::clamp(2.5 * bearing, -1.0, 1.0);
  a.values[kChBodyHeight] = 0.0;  // mid-range height
  a.values[kChGaitFreq] = 0.0;
  a.values[12] = gait_raw_;
  return a;
}

double EvalReport::mean_over_episodes() const {
  if (episodes.empty()) return 0.0;
  int s = 0;
  for (const auto& e : episodes) s += e.success ? 1 : 0;
  return static_cast<double>(s) / episodes.size();
}

double EvalReport::mean_over_cells() const {
  if (cells.empty()) return 0.0;
  double s = 0.0;
  for (const auto& c : cells) s += c.rate();
  return s / cells.size();
}

const CellResult* EvalReport::find_cell(const std::string& family,
                                        int level) const {
  for (const auto& c : cells)
    if (c.family == family && c.level == level) return &c;
  return nullptr;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json jc = nlohmann::json::array();
  for (const auto& c : cells)
    jc.push_back({{"family", c.family},
                  {"level", c.level},
                  {"successes", c.successes},
                  {"k", c.k}});
  nlohmann::json je = nlohmann::json::array();
  for (const auto& e : episodes)
    je.push_back({{"family", e.family},
                  {"level", e.level},
                  {"episode", e.episode},
                  {"success", e.success},
                  {"steps", e.steps},
                  {"gait_hist", e.gait_hist},
                  {"final_d", e.final_d}});
  return {{"schema_version", schema_version},
          {"k", k},
          {"seed", seed},
          {"empty_warning", empty_warning},
          {"cells", jc},
          {"episodes", je}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != 1)
    throw std::runtime_error("unsupported eval report schema version " +
                             std::to_string(r.schema_version));
  r.k = j.at("k").get<int>();
  r.seed = j.at("seed").get<uint64_t>();
  r.empty_warning = j.at("empty_warning").get<bool>();
  for (const auto& jc : j.at("cells")) {
    CellResult c;
    c.family = jc.at("family").get<std::string>();
    c.level = jc.at("level").get<int>();
    c.successes = jc.at("successes").get<int>();
    c.k = jc.at("k").get<int>();
    r.cells.push_back(std::move(c));
  }
  for (const auto& je : j.at("episodes")) {
    EpisodeRecord e;
    e.family = je.at("family").get<std::string>();
    e.level = je.at("level").get<int>();
    e.episode = je.at("episode").get<int>();
    e.success = je.at("success").get<bool>();
    e.steps = je.at("steps").get<int>();
    auto h = je.at("gait_hist").get<std::vector<int>>();
    if (h.size() != kNumGaits)
      throw std::runtime_error("bad gait histogram length");
    for (int g = 0; g < kNumGaits; ++g) e.gait_hist[g] = h[g];
    e.final_d = je.at("final_d").get<double>();
    r.episodes.push_back(std::move(e));
  }
  return r;
}

void EvalReport::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json().dump(2) << "\n";
}

EvalReport EvalReport::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

EvalReport evaluate(const RunConfig& cfg, EvalPolicy& policy,
                    const std::vector<Family>& families,
                    const std::vector<int>& levels, int K, uint64_t seed,
                    int forced_gait,
                    std::vector<TrajectoryRecord>* trajectories) {
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  EvalReport report;
  report.k = K;
  report.seed = seed;
  if (K == 0) {
    report.empty_warning = true;
    std::cerr << "warning: evaluation requested with K=0; rates are 0\n";
  }

  Env env(cfg, 0, seed);
  env.set_curriculum_enabled(false);

  for (Family family : families) {
    for (int level : levels) {
      CellResult cell;
      cell.family = family_name(family);
      cell.level = level + 1;
      cell.k = K;
      for (int ep = 0; ep < K; ++ep) {
        uint64_t tile_seed =
            hash_mix(hash_mix(seed, static_cast<uint64_t>(family),
                              static_cast<uint64_t>(level)),
                     static_cast<uint64_t>(ep) + 1);
        std::vector<TrajectoryRecord> traj;
        env.set_recorder(&traj);
        HighLevelObs obs = env.reset_fixed(level, family, tile_seed);
        policy.reset();

        EpisodeRecord rec;
        rec.family = cell.family;
        rec.level = cell.level;
        rec.episode = ep;
        while (true) {
          HighLevelAction a = policy.act(obs);
          if (forced_gait >= 0)
            a.values[12] = gait_bin_center(static_cast<Gait>(forced_gait));
          StepResult res = env.step(a);
          ++rec.steps;
          rec.final_d = res.d_goal;
          if (res.episode_end) {
            rec.success = res.success;
            break;
          }
          obs = res.obs;
        }
        for (const auto& t : traj) ++rec.gait_hist[t.gait];
        if (trajectories)
          trajectories->insert(trajectories->end(), traj.begin(), traj.end());
        if (rec.success) ++cell.successes;
        report.episodes.push_back(std::move(rec));
      }
      report.cells.push_back(std::move(cell));
    }
  }
  env.set_recorder(nullptr);
  return report;
}

namespace {
constexpr const char* kTrajSchema = "quadnav.trajectory";
constexpr int kTrajVersion = 1;
}  // namespace

void write_trajectories(const std::string& path,
                        const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << nlohmann::json{{"schema", kTrajSchema}, {"version", kTrajVersion}}
             .dump()
      << "\n";
  for (const auto& r : records)
    out << nlohmann::json{{"t", r.t},       {"x", r.x},
                          {"y", r.y},       {"z", r.z},
                          {"yaw", r.yaw},   {"gait", r.gait},
                          {"cmd", r.cmd},   {"reward", r.reward},
                          {"d_goal", r.d_goal}}
               .dump()
        << "\n";
}

std::vector<TrajectoryRecord> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("missing trajectory header in " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.at("schema") != kTrajSchema ||
      header.at("version").get<int>() != kTrajVersion)
    throw std::runtime_error("trajectory schema mismatch in " + path);
  std::vector<TrajectoryRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TrajectoryRecord r;
    r.t = j.at("t").get<int>();
    r.x = j.at("x").get<double>();
    r.y = j.at("y").get<double>();
    r.z = j.at("z").get<double>();
    r.yaw = j.at("yaw").get<double>();
    r.gait = j.at("gait").get<int>();
    auto cmd = j.at("cmd").get<std::vector<double>>();
    if (cmd.size() != kCommandDim)
      throw std::runtime_error("bad command length in trajectory record");
    for (int i = 0; i < kCommandDim; ++i) r.cmd[i] = cmd[i];
    r.reward = j.at("reward").get<double>();
    r.d_goal = j.at("d_goal").get<double>();
    out.push_back(r);
  }
  return out;
}

}  // namespace quadnav

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadnav/config.hpp"
#include "quadnav/hier_env.hpp"
#include "quadnav/net.hpp"

namespace quadnav {

// Episodic controller used by the evaluation harness. Stateful so recurrent
// policies can carry hidden state within an episode.
class EvalPolicy {
 public:
  virtual ~EvalPolicy() = default;
  virtual void reset() = 0;
  virtual HighLevelAction act(const HighLevelObs& obs) = 0;
};

// Deterministic (mean-action) wrapper around a trained recurrent policy.
class NetEvalPolicy : public EvalPolicy {
 public:
  explicit NetEvalPolicy(const PolicyNet& net);
  void reset() override;
  HighLevelAction act(const HighLevelObs& obs) override;

 private:
  const PolicyNet& net_;
  Eigen::MatrixXd h_;
};

// Built-in goal-seeking heuristic: drives forward along the goal bearing with
// proportional yaw correction, mid-range body height, fixed gait. Used to
// exercise the full protocol without a trained policy.
class GreedyEvalPolicy : public EvalPolicy {
 public:
  explicit GreedyEvalPolicy(Gait gait = Gait::kTrot);
  void reset() override {}
  HighLevelAction act(const HighLevelObs& obs) override;

 private:
  double gait_raw_;
};

// raw action value at the center of a gait's quantizer bin
double gait_bin_center(Gait gait);

struct EpisodeRecord {
  std::string family;
  int level = 0;   // reported 1-based
  int episode = 0;
  bool success = false;
  int steps = 0;
  std::array<int, kNumGaits> gait_hist{};
  double final_d = 0.0;
};

struct CellResult {
  std::string family;
  int level = 0;   // reported 1-based
  int successes = 0;
  int k = 0;
  double rate() const { return k > 0 ? static_cast<double>(successes) / k : 0.0; }
};

struct EvalReport {
  int schema_version = 1;
  int k = 0;
  uint64_t seed = 0;
  std::vector<CellResult> cells;
  std::vector<EpisodeRecord> episodes;
  bool empty_warning = false;  // set when k == 0

  // success aggregated over all episodes equally
  double mean_over_episodes() const;
  // unweighted mean of per-(family, level) cell rates
  double mean_over_cells() const;
  const CellResult* find_cell(const std::string& family, int level) const;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static EvalReport load(const std::string& path);
};

// Runs K episodes per (family, level) cell with the given policy; curriculum
// is disabled and tiles are seeded deterministically from `seed`. Levels are
// internal indices (0-based); the report stores them 1-based. forced_gait,
// when >= 0, overrides the gait channel with that gait's bin center before
// decoding.
EvalReport evaluate(const RunConfig& cfg, EvalPolicy& policy,
                    const std::vector<Family>& families,
                    const std::vector<int>& levels, int K, uint64_t seed,
                    int forced_gait = -1,
                    std::vector<TrajectoryRecord>* trajectories = nullptr);

// Trajectory export: line-delimited records, first line is a schema header.
void write_trajectories(const std::string& path,
                        const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_trajectories(const std::string& path);

}  // namespace quadnav

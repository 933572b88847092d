#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace quadnav {

struct CurriculumConfig {
  int window_len = 10;  // sliding window length
  int threshold_s = 7;  // promotion threshold
  int l_max = 10;
  std::string init = "zero";  // "zero" or "uniform"

  void validate() const;  // throws std::runtime_error on invalid values
  // true when {W-S+1 .. S-1} is empty, i.e. no hysteresis band
  bool hold_band_empty() const { return threshold_s - 1 < window_len - threshold_s + 1; }
};

struct EpisodeOutcome {
  bool reached_goal = false;
  bool failed = false;
  bool timeout = false;
};

// promotion/demotion rule on a full window: c >= S promotes, c < W-S+1 demotes,
// otherwise hold; level clamped to [0, l_max-1]
int update_level(int level, int successes, int window_len, int threshold_s,
                 int l_max);

class CurriculumState {
 public:
  CurriculumState(int n_envs, const CurriculumConfig& cfg, uint64_t seed = 0);

  // Push an episode outcome for env_i. Returns the new level if the window
  // filled and a promotion/demotion was applied (the window is then cleared),
  // nullopt otherwise.
  std::optional<int> record_outcome(int env_i, bool success);

  int level(int env_i) const;
  int window_fill(int env_i) const;
  int n_envs() const { return static_cast<int>(levels_.size()); }
  double mean_level() const;
  std::vector<int> level_histogram() const;

 private:
  CurriculumConfig cfg_;
  std::vector<int> levels_;
  std::vector<std::vector<bool>> windows_;
};

}  // namespace quadnav

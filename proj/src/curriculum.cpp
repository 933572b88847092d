#include "quadnav/curriculum.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "quadnav/rng.hpp"

namespace quadnav {

void CurriculumConfig::validate() const {
  if (window_len < 1) throw std::runtime_error("window_len must be >= 1");
  if (threshold_s < 1 || threshold_s > window_len)
    throw std::runtime_error("threshold_s must be in [1, window_len]");
  if (l_max < 1) throw std::runtime_error("l_max must be >= 1");
  if (init != "zero" && init != "uniform")
    throw std::runtime_error("curriculum init must be 'zero' or 'uniform'");
}

int update_level(int level, int successes, int window_len, int threshold_s,
                 int l_max) {
  if (successes < 0 || successes > window_len)
    throw std::domain_error("success count outside [0, window_len]");
  if (successes >= threshold_s) return std::min(level + 1, l_max - 1);
  if (successes < window_len - threshold_s + 1) return std::max(level - 1, 0);
  return level;
}

CurriculumState::CurriculumState(int n_envs, const CurriculumConfig& cfg,
                                 uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  levels_.assign(n_envs, 0);
  windows_.resize(n_envs);
  if (cfg_.init == "uniform") {
    Rng rng(hash_mix(seed, 0x5eed));
    for (int& l : levels_) l = static_cast<int>(rng.uniform_int(cfg_.l_max));
  }
}

std::optional<int> CurriculumState::record_outcome(int env_i, bool success) {
  if (env_i < 0 || env_i >= n_envs())
    throw std::domain_error("environment index out of range");
  auto& w = windows_[env_i];
  w.push_back(success);
  if (static_cast<int>(w.size()) < cfg_.window_len) return std::nullopt;
  int c = static_cast<int>(std::count(w.begin(), w.end(), true));
  int old_level = levels_[env_i];
  levels_[env_i] =
      update_level(old_level, c, cfg_.window_len, cfg_.threshold_s, cfg_.l_max);
  w.clear();
  return levels_[env_i];
}

int CurriculumState::level(int env_i) const {
  if (env_i < 0 || env_i >= n_envs())
    throw std::domain_error("environment index out of range");
  return levels_[env_i];
}

int CurriculumState::window_fill(int env_i) const {
  if (env_i < 0 || env_i >= n_envs())
    throw std::domain_error("environment index out of range");
  return static_cast<int>(windows_[env_i].size());
}

double CurriculumState::mean_level() const {
  if (levels_.empty()) return 0.0;
  return std::accumulate(levels_.begin(), levels_.end(), 0.0) / levels_.size();
}

std::vector<int> CurriculumState::level_histogram() const {
  std::vector<int> hist(cfg_.l_max, 0);
  for (int l : levels_) ++hist[l];
  return hist;
}

}  // namespace quadnav

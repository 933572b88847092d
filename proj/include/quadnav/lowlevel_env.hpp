#pragma once

#include <vector>

#include "quadnav/config.hpp"
#include "quadnav/lowlevel.hpp"
#include "quadnav/ppo.hpp"
#include "quadnav/rng.hpp"

namespace quadnav {

// Toy joint-level training environment. Stands in for the full physics stage:
// the base tracks the commanded velocity only to the extent that the joint
// targets follow a phase-locked reference oscillation, so the policy has to
// learn the gait pattern to earn the tracking reward. Carries no fidelity
// claims; it exists so the joint-level mode can exercise the same trainer.
class LowLevelToyEnv : public RolloutEnv {
 public:
  LowLevelToyEnv(const RunConfig& cfg, int n_envs, uint64_t seed);

  int obs_dim() const override { return kLowLevelObsDim; }
  int act_dim() const override { return kNumJoints; }
  int n_envs() const override { return static_cast<int>(states_.size()); }
  Eigen::MatrixXd reset_all() override;
  BatchResult step(const Eigen::MatrixXd& actions) override;

  static constexpr int kEpisodeLen = 100;
  static constexpr double kDt = 0.02;

 private:
  struct EnvState {
    ProprioState prop;
    PhaseClock clock;
    CommandVector cmd;
    JointVec q{}, a_prev{}, a_prev2{};
    int t = 0;
    double lin_reward_sum = 0.0;
  };

  void reset_env(int i);
  LowLevelObs make_obs(const EnvState& s) const;
  // phase-locked joint reference the toy dynamics reward tracking against
  JointVec reference_pose(const EnvState& s) const;

  RunConfig cfg_;
  std::vector<EnvState> states_;
  std::vector<Rng> rngs_;
};

}  // namespace quadnav

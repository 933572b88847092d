#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quadnav/config.hpp"
#include "quadnav/hier_env.hpp"
#include "quadnav/net.hpp"

namespace quadnav {

// Environment backend the trainer rolls out against. Implementations must be
// deterministic for a fixed seed.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual int n_envs() const = 0;
  virtual Eigen::MatrixXd reset_all() = 0;  // obs_dim x N

  struct BatchResult {
    Eigen::MatrixXd obs;       // obs_dim x N (post-reset where episodes ended)
    Eigen::VectorXd rewards;   // N
    std::vector<uint8_t> terminal, trunc;  // N
    int episodes_ended = 0;
    int successes = 0;
  };
  virtual BatchResult step(const Eigen::MatrixXd& actions) = 0;

  virtual double mean_level() const { return 0.0; }
  virtual std::vector<int> level_histogram() const { return {}; }
};

// Adapter over the hierarchical VecEnv.
class HierRolloutEnv : public RolloutEnv {
 public:
  HierRolloutEnv(const RunConfig& cfg, int n_envs, uint64_t seed, int workers);
  int obs_dim() const override { return kHighObsDim; }
  int act_dim() const override { return kActionDim; }
  int n_envs() const override { return vec_.n_envs(); }
  Eigen::MatrixXd reset_all() override;
  BatchResult step(const Eigen::MatrixXd& actions) override;
  double mean_level() const override { return vec_.mean_level(); }
  std::vector<int> level_histogram() const override {
    return vec_.level_histogram();
  }
  VecEnv& vec() { return vec_; }

 private:
  VecEnv vec_;
};

// T x N on-policy storage. Column index = t * N + i.
struct RolloutBuffer {
  int T = 0, N = 0;
  Eigen::MatrixXd obs;       // obs_dim x T*N
  Eigen::MatrixXd actions;   // act_dim x T*N
  Eigen::VectorXd logp, values, rewards;  // T*N
  std::vector<uint8_t> terminal, trunc;   // T*N
  Eigen::MatrixXd h_start;   // hidden x N, recurrent state at segment start
  Eigen::VectorXd bootstrap; // N, value of the step after the segment
  Eigen::VectorXd adv, ret;  // filled by compute_gae / normalize

  int idx(int t, int i) const { return t * N + i; }
  void allocate(int T_, int N_, int obs_dim, int act_dim, int hidden);
};

// GAE over a single T-step chain. values has length T+1 (bootstrap last).
// delta_t = r_t + gamma v_{t+1} (1 - terminal_t) - v_t
// A_t = delta_t + gamma lambda (1 - terminal_t)(1 - trunc_t) A_{t+1}
// Truncation bootstraps delta with v_{t+1} but stops advantage flow.
void compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                 const std::vector<uint8_t>& terminal,
                 const std::vector<uint8_t>& trunc, double gamma, double lambda,
                 Eigen::VectorXd* adv, Eigen::VectorXd* ret);

// Applies compute_gae per environment chain and normalizes advantages over
// the whole batch (mean 0, std 1).
void compute_gae_buffer(RolloutBuffer& buf, double gamma, double lambda);

struct UpdateStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
};

// Clipped-surrogate PPO update: epochs x sequence-contiguous minibatches of
// whole environments, hidden states replayed from the stored segment starts.
// Throws std::runtime_error on non-finite loss.
UpdateStats ppo_update(const RolloutBuffer& buf, PolicyNet& net, Adam& opt,
                       const TrainerConfig& cfg, Rng& shuffle_rng);

// Loss and analytic gradient for one minibatch of whole-environment
// sequences. Exposed so gradient checks can compare against finite
// differences. grad/stats may be null.
double ppo_minibatch_loss_grad(const RolloutBuffer& buf,
                               const std::vector<int>& env_indices,
                               const PolicyNet& net, const TrainerConfig& cfg,
                               Eigen::VectorXd* grad, UpdateStats* stats);

struct IterStats {
  int iteration = 0;
  double mean_reward = 0.0;
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_level = 0.0;
  UpdateStats update;
};

class Trainer {
 public:
  // run_dir may be empty (no files written)
  Trainer(const RunConfig& cfg, std::unique_ptr<RolloutEnv> env,
          const std::string& run_dir);

  IterStats run_iteration();
  void train();  // cfg.trainer.max_iterations iterations with logging

  PolicyNet& policy() { return net_; }
  const RolloutBuffer& last_buffer() const { return buf_; }
  RolloutEnv& env() { return *env_; }
  const std::vector<IterStats>& history() const { return history_; }

  void save_checkpoint(const std::string& path, int iteration) const;
  // returns the stored iteration; throws on config-hash mismatch unless
  // ignore_hash
  int load_checkpoint(const std::string& path, bool ignore_hash = false);

  nlohmann::json metrics_line(const IterStats& s) const;

 private:
  // fills buf_; returns (episodes ended, successes) during the segment
  std::pair<int, int> collect_rollout();

  RunConfig cfg_;
  std::unique_ptr<RolloutEnv> env_;
  PolicyNet net_;
  Adam opt_;
  Rng action_rng_, shuffle_rng_;
  Eigen::MatrixXd hidden_;  // carried across iterations
  Eigen::MatrixXd last_obs_;
  RolloutBuffer buf_;
  int iteration_ = 0;
  bool started_ = false;
  std::string run_dir_;
  std::vector<IterStats> history_;
};

// checkpoint file helpers (versioned binary with config hash)
void write_checkpoint(const std::string& path, uint64_t config_hash,
                      const PolicyNet& net, const Adam& opt, int iteration);
struct CheckpointData {
  uint64_t config_hash = 0;
  int obs_dim = 0, act_dim = 0, hidden = 0;
  Eigen::VectorXd params, adam_m, adam_v;
  int64_t adam_t = 0;
  int iteration = 0;
};
CheckpointData read_checkpoint(const std::string& path);

}  // namespace quadnav

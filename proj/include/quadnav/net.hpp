#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "quadnav/rng.hpp"

namespace quadnav {

// Recurrent actor-critic: single GRU cell feeding a Gaussian actor head
// (means + state-independent log-std) and a scalar critic head. Parameters
// live in one flat vector so the optimizer and finite-difference checks can
// treat them uniformly; all gradients are computed analytically.
class PolicyNet {
 public:
  PolicyNet(int obs_dim, int act_dim, int hidden, double log_std_init,
            uint64_t seed);

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  int hidden() const { return hidden_; }
  int param_count() const { return static_cast<int>(theta_.size()); }

  Eigen::VectorXd& params() { return theta_; }
  const Eigen::VectorXd& params() const { return theta_; }

  // Per-step forward cache for backprop through time.
  struct Cache {
    Eigen::MatrixXd x, h_prev, z, r, n, a_h, h_new;
  };

  // One recurrent step over a batch of B columns.
  // X: obs_dim x B, H: hidden x B. Outputs mu (act_dim x B), v (B),
  // Hn (hidden x B). cache may be null when no backward pass is needed.
  void forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& H,
               Eigen::MatrixXd* mu, Eigen::VectorXd* v, Eigen::MatrixXd* Hn,
               Cache* cache) const;

  // Backward for one step. dmu: act_dim x B, dv: B, dHnew: hidden x B
  // (gradient flowing into h' from the future). Accumulates parameter
  // gradients into grad and returns dH w.r.t. the incoming hidden state.
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& dmu,
                           const Eigen::VectorXd& dv,
                           const Eigen::MatrixXd& dHnew,
                           Eigen::VectorXd& grad) const;

  Eigen::VectorXd log_std() const;
  void accumulate_log_std_grad(const Eigen::VectorXd& d, Eigen::VectorXd& grad) const;

  // diag-Gaussian entropy, closed form
  double entropy() const;

  // log pi(a|mu) for each column
  Eigen::VectorXd log_prob(const Eigen::MatrixXd& mu,
                           const Eigen::MatrixXd& actions) const;

 private:
  // flat parameter slices
  struct Slices;
  int obs_dim_, act_dim_, hidden_;
  Eigen::VectorXd theta_;

  // offsets into theta_
  int o_Wiz_, o_Wir_, o_Win_, o_Whz_, o_Whr_, o_Whn_;
  int o_bz_, o_br_, o_bin_, o_bhn_;
  int o_Wmu_, o_bmu_, o_logstd_, o_Wv_, o_bv_;
};

class Adam {
 public:
  Adam(int n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  // serialized state for checkpoints
  const Eigen::VectorXd& m() const { return m_; }
  const Eigen::VectorXd& v() const { return v_; }
  int64_t t() const { return t_; }
  void restore(const Eigen::VectorXd& m, const Eigen::VectorXd& v, int64_t t);
  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  Eigen::VectorXd m_, v_;
};

// global-norm gradient clipping, returns the pre-clip norm
double clip_grad_norm(Eigen::VectorXd& grad, double max_norm);

}  // namespace quadnav

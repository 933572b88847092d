#include "quadnav/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace quadnav {

using Eigen::MatrixXd;
using Eigen::VectorXd;

HierRolloutEnv::HierRolloutEnv(const RunConfig& cfg, int n_envs, uint64_t seed,
                               int workers)
    : vec_(cfg, n_envs, seed, workers) {}

MatrixXd HierRolloutEnv::reset_all() {
  auto obs = vec_.reset_all();
  MatrixXd out(kHighObsDim, obs.size());
  for (size_t i = 0; i < obs.size(); ++i)
    for (int j = 0; j < kHighObsDim; ++j) out(j, i) = obs[i].values[j];
  return out;
}

RolloutEnv::BatchResult HierRolloutEnv::step(const MatrixXd& actions) {
  int n = vec_.n_envs();
  if (actions.cols() != n || actions.rows() != kActionDim)
    throw std::invalid_argument("action batch shape mismatch");
  std::vector<HighLevelAction> acts(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < kActionDim; ++j) acts[i].values[j] = actions(j, i);
  auto results = vec_.batch_step(acts);
  BatchResult out;
  out.obs.resize(kHighObsDim, n);
  out.rewards.resize(n);
  out.terminal.assign(n, 0);
  out.trunc.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kHighObsDim; ++j) out.obs(j, i) = results[i].obs.values[j];
    out.rewards[i] = results[i].reward;
    out.terminal[i] = results[i].terminated ? 1 : 0;
    out.trunc[i] = results[i].truncated ? 1 : 0;
    if (results[i].episode_end) {
      ++out.episodes_ended;
      if (results[i].success) ++out.successes;
    }
  }
  return out;
}

void RolloutBuffer::allocate(int T_, int N_, int obs_dim, int act_dim,
                             int hidden) {
  T = T_;
  N = N_;
  obs.resize(obs_dim, T * N);
  actions.resize(act_dim, T * N);
  logp.resize(T * N);
  values.resize(T * N);
  rewards.resize(T * N);
  terminal.assign(T * N, 0);
  trunc.assign(T * N, 0);
  h_start.resize(hidden, N);
  bootstrap.resize(N);
  adv.resize(T * N);
  ret.resize(T * N);
}

void compute_gae(const VectorXd& rewards, const VectorXd& values,
                 const std::vector<uint8_t>& terminal,
                 const std::vector<uint8_t>& trunc, double gamma, double lambda,
                 VectorXd* adv, VectorXd* ret) {
  long T = rewards.size();
  if (values.size() != T + 1 || static_cast<long>(terminal.size()) != T ||
      static_cast<long>(trunc.size()) != T)
    throw std::invalid_argument("compute_gae length mismatch");
  adv->resize(T);
  ret->resize(T);
  double a = 0.0;
  for (long t = T - 1; t >= 0; --t) {
    double not_term = terminal[t] ? 0.0 : 1.0;
    double not_done = (terminal[t] || trunc[t]) ? 0.0 : 1.0;
    double delta = rewards[t] + gamma * values[t + 1] * not_term - values[t];
    a = delta + gamma * lambda * not_done * a;
    (*adv)[t] = a;
    (*ret)[t] = a + values[t];
  }
}

void compute_gae_buffer(RolloutBuffer& buf, double gamma, double lambda) {
  VectorXd r(buf.T), v(buf.T + 1), a, g;
  std::vector<uint8_t> term(buf.T), tr(buf.T);
  for (int i = 0; i < buf.N; ++i) {
    for (int t = 0; t < buf.T; ++t) {
      int k = buf.idx(t, i);
      r[t] = buf.rewards[k];
      v[t] = buf.values[k];
      term[t] = buf.terminal[k];
      tr[t] = buf.trunc[k];
    }
    v[buf.T] = buf.bootstrap[i];
    compute_gae(r, v, term, tr, gamma, lambda, &a, &g);
    for (int t = 0; t < buf.T; ++t) {
      buf.adv[buf.idx(t, i)] = a[t];
      buf.ret[buf.idx(t, i)] = g[t];
    }
  }
  double mean = buf.adv.mean();
  double sd = std::sqrt((buf.adv.array() - mean).square().mean());
  buf.adv = (buf.adv.array() - mean) / (sd + 1e-8);
}

double ppo_minibatch_loss_grad(const RolloutBuffer& buf,
                               const std::vector<int>& env_indices,
                               const PolicyNet& net, const TrainerConfig& cfg,
                               VectorXd* grad, UpdateStats* stats) {
  int T = buf.T;
  int B = static_cast<int>(env_indices.size());
  int act = net.act_dim();
  int M = T * B;
  double inv_m = 1.0 / M;

  VectorXd ls = net.log_std();
  VectorXd inv_var = (-2.0 * ls.array()).exp();

  std::vector<PolicyNet::Cache> caches(T);
  std::vector<MatrixXd> dmu(T), acts_t(T);
  std::vector<VectorXd> dv(T);
  std::vector<std::vector<uint8_t>> done(T, std::vector<uint8_t>(B, 0));
  VectorXd dlogstd = VectorXd::Zero(act);

  MatrixXd H(net.hidden(), B);
  for (int b = 0; b < B; ++b) H.col(b) = buf.h_start.col(env_indices[b]);

  double policy_loss = 0.0, value_loss = 0.0;
  double clip_count = 0.0, kl_sum = 0.0;
  double eps = cfg.clip_eps;

  MatrixXd X(net.obs_dim(), B), mu, Hn;
  VectorXd v;
  for (int t = 0; t < T; ++t) {
    MatrixXd A(act, B);
    for (int b = 0; b < B; ++b) {
      int k = buf.idx(t, env_indices[b]);
      X.col(b) = buf.obs.col(k);
      A.col(b) = buf.actions.col(k);
      done[t][b] = buf.terminal[k] || buf.trunc[k];
    }
    net.forward(X, H, &mu, &v, &Hn, grad ? &caches[t] : nullptr);
    VectorXd logp_new = net.log_prob(mu, A);

    dmu[t] = MatrixXd::Zero(act, B);
    dv[t] = VectorXd::Zero(B);
    acts_t[t] = A;
    for (int b = 0; b < B; ++b) {
      int k = buf.idx(t, env_indices[b]);
      double adv = buf.adv[k];
      double ratio = std::exp(logp_new[b] - buf.logp[k]);
      double s1 = ratio * adv;
      double s2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
      double dlogp = 0.0;
      if (s1 <= s2) {
        policy_loss += -s1 * inv_m;
        dlogp = -adv * ratio * inv_m;
      } else {
        policy_loss += -s2 * inv_m;
        // clipped branch is constant in the parameters
      }
      if (std::abs(ratio - 1.0) > eps) clip_count += 1.0;
      kl_sum += buf.logp[k] - logp_new[b];

      double verr = v[b] - buf.ret[k];
      value_loss += cfg.value_coef * verr * verr * inv_m;
      dv[t][b] = 2.0 * cfg.value_coef * verr * inv_m;

      for (int j = 0; j < act; ++j) {
        double e = A(j, b) - mu(j, b);
        dmu[t](j, b) += dlogp * e * inv_var[j];
        dlogstd[j] += dlogp * (e * e * inv_var[j] - 1.0);
      }
    }

    // hidden resets at episode boundaries during replay
    for (int b = 0; b < B; ++b)
      if (done[t][b]) Hn.col(b).setZero();
    H = Hn;
  }

  double entropy = net.entropy();
  double total = policy_loss + value_loss - cfg.entropy_coef * entropy;
  if (!std::isfinite(total))
    throw std::runtime_error("non-finite PPO loss; aborting update");

  if (grad) {
    MatrixXd dH = MatrixXd::Zero(net.hidden(), B);
    for (int t = T - 1; t >= 0; --t) {
      MatrixXd dh_prev = net.backward(caches[t], dmu[t], dv[t], dH, *grad);
      if (t > 0) {
        for (int b = 0; b < B; ++b)
          if (done[t - 1][b]) dh_prev.col(b).setZero();
        dH = dh_prev;
      }
    }
    dlogstd.array() -= cfg.entropy_coef;  // entropy bonus gradient
    net.accumulate_log_std_grad(dlogstd, *grad);
  }

  if (stats) {
    stats->loss = total;
    stats->policy_loss = policy_loss;
    stats->value_loss = value_loss;
    stats->entropy = entropy;
    stats->clip_fraction = clip_count / M;
    stats->approx_kl = kl_sum / M;
  }
  return total;
}

UpdateStats ppo_update(const RolloutBuffer& buf, PolicyNet& net, Adam& opt,
                       const TrainerConfig& cfg, Rng& shuffle_rng) {
  int N = buf.N;
  int mb_count = cfg.minibatches;
  int mb_size = N / mb_count;
  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);

  UpdateStats agg;
  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the deterministic stream
    for (int i = N - 1; i > 0; --i) {
      int j = static_cast<int>(shuffle_rng.uniform_int(i + 1));
      std::swap(perm[i], perm[j]);
    }
    for (int mb = 0; mb < mb_count; ++mb) {
      std::vector<int> envs(perm.begin() + mb * mb_size,
                            perm.begin() + (mb + 1) * mb_size);
      VectorXd grad = VectorXd::Zero(net.param_count());
      UpdateStats s;
      ppo_minibatch_loss_grad(buf, envs, net, cfg, &grad, &s);
      s.grad_norm = clip_grad_norm(grad, cfg.grad_clip);
      opt.step(net.params(), grad);
      agg.loss += s.loss;
      agg.policy_loss += s.policy_loss;
      agg.value_loss += s.value_loss;
      agg.entropy += s.entropy;
      agg.clip_fraction += s.clip_fraction;
      agg.approx_kl += s.approx_kl;
      agg.grad_norm += s.grad_norm;
      ++updates;
    }
  }
  agg.loss /= updates;
  agg.policy_loss /= updates;
  agg.value_loss /= updates;
  agg.entropy /= updates;
  agg.clip_fraction /= updates;
  agg.approx_kl /= updates;
  agg.grad_norm /= updates;
  return agg;
}

Trainer::Trainer(const RunConfig& cfg, std::unique_ptr<RolloutEnv> env,
                 const std::string& run_dir)
    : cfg_(cfg),
      env_(std::move(env)),
      net_(env_->obs_dim(), env_->act_dim(), cfg.trainer.hidden,
           cfg.trainer.log_std_init, cfg.trainer.seed),
      opt_(net_.param_count(), cfg.trainer.lr),
      action_rng_(hash_mix(cfg.trainer.seed, 0xac7)),
      shuffle_rng_(hash_mix(cfg.trainer.seed, 0x5f1e)),
      run_dir_(run_dir) {
  cfg_.resolve();
  cfg_.trainer.validate();
  if (env_->n_envs() % cfg_.trainer.minibatches != 0)
    throw std::runtime_error("n_envs must be divisible by minibatches");
  hidden_ = MatrixXd::Zero(cfg.trainer.hidden, env_->n_envs());
  buf_.allocate(cfg_.trainer.rollout_t, env_->n_envs(), env_->obs_dim(),
                env_->act_dim(), cfg_.trainer.hidden);
  if (!run_dir_.empty()) {
    std::filesystem::create_directories(run_dir_);
    cfg_.save(run_dir_ + "/config.json");
  }
}

std::pair<int, int> Trainer::collect_rollout() {
  if (!started_) {
    last_obs_ = env_->reset_all();
    hidden_.setZero();
    started_ = true;
  }
  int T = buf_.T, N = buf_.N, act = net_.act_dim();
  buf_.h_start = hidden_;
  VectorXd sigma = net_.log_std().array().exp();
  int episodes = 0, successes = 0;

  MatrixXd mu, Hn;
  VectorXd v;
  for (int t = 0; t < T; ++t) {
    net_.forward(last_obs_, hidden_, &mu, &v, &Hn, nullptr);
    MatrixXd actions(act, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < act; ++j)
        actions(j, i) = mu(j, i) + sigma[j] * action_rng_.normal();
    VectorXd logp = net_.log_prob(mu, actions);
    for (int i = 0; i < N; ++i) {
      int k = buf_.idx(t, i);
      buf_.obs.col(k) = last_obs_.col(i);
      buf_.actions.col(k) = actions.col(i);
      buf_.logp[k] = logp[i];
      buf_.values[k] = v[i];
    }
    auto res = env_->step(actions);
    episodes += res.episodes_ended;
    successes += res.successes;
    for (int i = 0; i < N; ++i) {
      int k = buf_.idx(t, i);
      buf_.rewards[k] = res.rewards[i];
      buf_.terminal[k] = res.terminal[i];
      buf_.trunc[k] = res.trunc[i];
    }
    hidden_ = Hn;
    for (int i = 0; i < N; ++i)
      if (res.terminal[i] || res.trunc[i]) hidden_.col(i).setZero();
    last_obs_ = res.obs;
  }
  net_.forward(last_obs_, hidden_, nullptr, &v, nullptr, nullptr);
  buf_.bootstrap = v;
  return {episodes, successes};
}

IterStats Trainer::run_iteration() {
  IterStats s;
  s.iteration = ++iteration_;
  auto [episodes, successes] = collect_rollout();

  compute_gae_buffer(buf_, cfg_.trainer.gamma, cfg_.trainer.gae_lambda);
  s.update = ppo_update(buf_, net_, opt_, cfg_.trainer, shuffle_rng_);
  s.mean_reward = buf_.rewards.mean();
  s.episodes = episodes;
  s.successes = successes;
  s.success_rate = episodes > 0 ? static_cast<double>(successes) / episodes : 0.0;
  s.mean_level = env_->mean_level();
  history_.push_back(s);
  return s;
}

nlohmann::json Trainer::metrics_line(const IterStats& s) const {
  return nlohmann::json{{"iter", s.iteration},
                        {"mean_reward", s.mean_reward},
                        {"episodes", s.episodes},
                        {"successes", s.successes},
                        {"success_rate", s.success_rate},
                        {"mean_level", s.mean_level},
                        {"level_hist", env_->level_histogram()},
                        {"loss", s.update.loss},
                        {"policy_loss", s.update.policy_loss},
                        {"value_loss", s.update.value_loss},
                        {"entropy", s.update.entropy},
                        {"clip_fraction", s.update.clip_fraction},
                        {"approx_kl", s.update.approx_kl},
                        {"grad_norm", s.update.grad_norm}};
}

void Trainer::train() {
  std::ofstream metrics;
  if (!run_dir_.empty()) metrics.open(run_dir_ + "/metrics.jsonl");
  for (int i = 0; i < cfg_.trainer.max_iterations; ++i) {
    IterStats s = run_iteration();
    if (metrics.is_open()) metrics << metrics_line(s).dump() << "\n";
    if (!run_dir_.empty() && cfg_.trainer.checkpoint_every > 0 &&
        s.iteration % cfg_.trainer.checkpoint_every == 0)
      save_checkpoint(run_dir_ + "/ckpt_" + std::to_string(s.iteration) + ".bin",
                      s.iteration);
  }
  if (!run_dir_.empty())
    save_checkpoint(run_dir_ + "/ckpt_final.bin", iteration_);
}

void Trainer::save_checkpoint(const std::string& path, int iteration) const {
  write_checkpoint(path, cfg_.hash(), net_, opt_, iteration);
}

int Trainer::load_checkpoint(const std::string& path, bool ignore_hash) {
  CheckpointData d = read_checkpoint(path);
  if (!ignore_hash && d.config_hash != cfg_.hash())
    throw std::runtime_error("checkpoint config hash mismatch");
  if (d.obs_dim != net_.obs_dim() || d.act_dim != net_.act_dim() ||
      d.hidden != net_.hidden())
    throw std::runtime_error("checkpoint dimension mismatch");
  net_.params() = d.params;
  opt_.restore(d.adam_m, d.adam_v, d.adam_t);
  iteration_ = d.iteration;
  return d.iteration;
}

namespace {
constexpr uint32_t kCkptMagic = 0x514e434bU;  // "QNCK"
constexpr uint32_t kCkptVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void write_checkpoint(const std::string& path, uint64_t config_hash,
                      const PolicyNet& net, const Adam& opt, int iteration) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  put(out, kCkptMagic);
  put(out, kCkptVersion);
  put(out, config_hash);
  put(out, static_cast<int32_t>(net.obs_dim()));
  put(out, static_cast<int32_t>(net.act_dim()));
  put(out, static_cast<int32_t>(net.hidden()));
  put(out, static_cast<int32_t>(iteration));
  int64_t n = net.param_count();
  put(out, n);
  out.write(reinterpret_cast<const char*>(net.params().data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(opt.m().data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(opt.v().data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  put(out, opt.t());
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  uint32_t magic = 0, version = 0;
  get(in, magic);
  get(in, version);
  if (magic != kCkptMagic) throw std::runtime_error("not a checkpoint file");
  if (version != kCkptVersion)
    throw std::runtime_error("unsupported checkpoint version");
  CheckpointData d;
  get(in, d.config_hash);
  int32_t obs = 0, act = 0, hid = 0, iter = 0;
  get(in, obs);
  get(in, act);
  get(in, hid);
  get(in, iter);
  d.obs_dim = obs;
  d.act_dim = act;
  d.hidden = hid;
  d.iteration = iter;
  int64_t n = 0;
  get(in, n);
  d.params.resize(n);
  d.adam_m.resize(n);
  d.adam_v.resize(n);
  in.read(reinterpret_cast<char*>(d.params.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(d.adam_m.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(d.adam_v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  get(in, d.adam_t);
  if (!in) throw std::runtime_error("truncated checkpoint " + path);
  return d;
}

}  // namespace quadnav

// Acceptance suite: run with a single argument selecting the criterion
// (1-8). Each criterion prints exactly one PASS/FAIL line and the process
// exits nonzero on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "quadnav/curriculum.hpp"
#include "quadnav/decoder.hpp"
#include "quadnav/eval.hpp"
#include "quadnav/hier_env.hpp"
#include "quadnav/ppo.hpp"
#include "quadnav/reward.hpp"
#include "quadnav/rng.hpp"
#include "quadnav/terrain.hpp"

using namespace quadnav;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Checker {
  int failures = 0;
  std::string first_failure;
  void require(bool ok, const std::string& msg) {
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = msg;
    }
  }
};

// ---------------------------------------------------------------- criterion 1

std::string crit1(Checker& ck) {
  // dense gait scan: quantizer bins must partition [-1,1] exactly
  std::array<int, kNumGaits> seen{};
  for (long i = 0; i <= 20000; ++i) {
    double x = -1.0 + 1e-4 * i;
    if (x > 1.0) x = 1.0;
    int g = quantize_gait(x);
    int expect = x < -0.5 ? 0 : x < 0.0 ? 1 : x < 0.5 ? 2 : 3;
    ck.require(g == expect, "gait bin mismatch at x=" + std::to_string(x));
    ++seen[g];
  }
  for (int g = 0; g < kNumGaits; ++g)
    ck.require(seen[g] > 0, "gait bin " + std::to_string(g) + " never hit");

  // random 13-vectors decode within channel bounds
  CommandBounds bounds = CommandBounds::defaults();
  Rng rng(1001);
  for (int i = 0; i < 100000; ++i) {
    HighLevelAction a;
    for (auto& v : a.values) v = rng.uniform(-3.0, 3.0);
    CommandVector c = decode(a, bounds, 1.0);
    for (int j = 0; j < kContinuousDim; ++j) {
      const auto& b = bounds.channels[j];
      ck.require(c.continuous[j] >= b.lo - 1e-12 &&
                     c.continuous[j] <= b.hi + 1e-12,
                 "channel " + b.name + " out of bounds");
    }
    ck.require(c.gait_index >= 0 && c.gait_index < kNumGaits,
               "gait index out of range");
  }
  return "dense gait scan partitions [-1,1] into 4 bins; 1e5 random actions "
         "decode within channel bounds";
}

// ---------------------------------------------------------------- criterion 2

std::string crit2(Checker& ck) {
  TerrainConfig cfg;
  const uint64_t seed = 11;
  for (Family f : kAllFamilies) {
    double lo = 0, hi = 0;
    switch (f) {
      case Family::Rough: lo = cfg.rough.a_min; hi = cfg.rough.a_max; break;
      case Family::Pillar: lo = cfg.pillar.n_min; hi = cfg.pillar.n_max; break;
      case Family::Stair: lo = cfg.stair.h_min; hi = cfg.stair.h_max; break;
      case Family::Gap: lo = cfg.gap.w_min; hi = cfg.gap.w_max; break;
      case Family::Tilt: lo = cfg.tilt.theta_min; hi = cfg.tilt.theta_max; break;
    }
    HeightField f0 = generate_heightfield(f, 0.0, seed, cfg);
    HeightField f1 = generate_heightfield(f, 1.0, seed, cfg);
    ck.require(std::abs(f0.realized_param - lo) < 1e-9,
               family_name(f) + " parameter at d=0 != minimum");
    ck.require(std::abs(f1.realized_param - hi) < 1e-9,
               family_name(f) + " parameter at d=1 != maximum");

    double prev = -1e300;
    for (int level = 0; level < cfg.l_max; ++level) {
      TerrainTile t = sample_tile(cfg, level, f, seed);
      ck.require(t.field.realized_param >= prev - 1e-12,
                 family_name(f) + " parameter not monotone across levels");
      prev = t.field.realized_param;
    }
  }

  // tilt: exact plane on every challenge cell
  for (double d : {0.0, 0.3, 0.7, 1.0}) {
    HeightField hf = generate_heightfield(Family::Tilt, d, 77, cfg);
    double theta = hf.realized_param;
    for (int ix = 0; ix < hf.nx; ++ix)
      for (int iy = 0; iy < hf.ny; ++iy) {
        if (hf.zone(ix, iy) != Zone::Challenge) continue;
        double want = (hf.cell_y(iy) - cfg.width_m / 2.0) * std::tan(theta);
        ck.require(std::abs(hf.h(ix, iy) - want) < 1e-9,
                   "tilt plane mismatch at a challenge cell");
      }
  }
  return "per-family parameters hit configured endpoints at d=0/1 (1e-9), "
         "are monotone over levels, and tilt planes are exact";
}

// ---------------------------------------------------------------- criterion 3

// naive straight-line recomputation, independent of the production path
double reward_oracle(const HighLevelRewardInputs& in,
                     const HighLevelRewardConfig& cfg) {
  double p = 1.0 - in.d_t / cfg.r_map;
  p = p < 0 ? 0 : (p > 1 ? 1 : p);
  double goal = p + cfg.shape_a * (1.0 - std::exp(-cfg.shape_b * p));
  double face = std::cos(in.yaw_star - in.yaw);
  double alpha = 1.0 - static_cast<double>(in.t) / cfg.t_max;
  alpha = alpha < 0 ? 0 : (alpha > 1 ? 1 : alpha);
  double arrive = in.d_t < cfg.d0 ? cfg.b0 + cfg.b1 * alpha : 0.0;
  double eta = in.lin_vel_norm + in.ang_vel_norm + cfg.beta * in.joint_vel_norm;
  double stable = 0.0;
  if (in.d_t < cfg.d0)
    stable = std::exp(-eta) *
             std::exp(-(in.z - cfg.z_star) * (in.z - cfg.z_star) / cfg.sigma_z);
  double action_rate = 0.0;
  for (int j = 0; j < kActionDim; ++j) {
    double e = in.action[j] - in.action_prev[j];
    action_rate += e * e;
  }
  double sm1 = 0.0, sm2 = 0.0;
  for (int j = 0; j < kCommandDim; ++j) {
    double d1 = in.cmd[j] - in.cmd_prev[j];
    double d1p = in.cmd_prev[j] - in.cmd_prev2[j];
    sm1 += d1 * d1;
    sm2 += (d1 - d1p) * (d1 - d1p);
  }
  sm1 /= kCommandDim;
  sm2 /= kCommandDim;
  double col = 0.0;
  for (const Vec3& f : in.contact_forces) {
    double mag = std::sqrt(f.x * f.x + f.y * f.y + f.z * f.z);
    if (mag > cfg.f_th) col += mag - cfg.f_th;
  }
  double lazy = (in.d_t > cfg.d0 && in.planar_speed < cfg.v_th) ? 1.0 : 0.0;
  const auto& w = cfg.weights;
  return cfg.step_dt *
         (w.goal_dist * goal + w.face * face + w.arrive * arrive +
          w.stable * stable + w.action_rate * action_rate + w.cmd_sm1 * sm1 +
          w.cmd_sm2 * sm2 + w.col * col + w.lazy * lazy + w.alive * 1.0);
}

std::string crit3(Checker& ck) {
  HighLevelRewardConfig cfg;
  cfg.r_map = 8.944;
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    HighLevelRewardInputs in;
    in.d_t = rng.uniform(0.0, 12.0);
    in.t = static_cast<int>(rng.uniform_int(200));
    in.yaw = rng.uniform(-M_PI, M_PI);
    in.yaw_star = rng.uniform(-M_PI, M_PI);
    in.lin_vel_norm = rng.uniform(0.0, 2.0);
    in.ang_vel_norm = rng.uniform(0.0, 2.0);
    in.joint_vel_norm = rng.uniform(0.0, 5.0);
    in.z = rng.uniform(0.1, 0.5);
    in.planar_speed = rng.uniform(0.0, 1.0);
    int nf = static_cast<int>(rng.uniform_int(4));
    for (int j = 0; j < nf; ++j)
      in.contact_forces.push_back(
          {rng.uniform(-60, 60), rng.uniform(-60, 60), rng.uniform(-60, 60)});
    for (auto& v : in.action) v = rng.uniform(-1, 1);
    for (auto& v : in.action_prev) v = rng.uniform(-1, 1);
    for (auto& v : in.cmd) v = rng.uniform(-2, 2);
    for (auto& v : in.cmd_prev) v = rng.uniform(-2, 2);
    for (auto& v : in.cmd_prev2) v = rng.uniform(-2, 2);

    RewardBreakdown b = high_level_reward(in, cfg);
    double resum = 0.0;
    for (const auto& term : b.terms) resum += term.raw * term.weight_eff;
    ck.require(std::abs(b.total - resum) < 1e-12,
               "breakdown total does not resum");
    ck.require(std::abs(b.total - reward_oracle(in, cfg)) < 1e-12,
               "total deviates from the independent recomputation");
  }

  // closed-form spot values
  ck.require(r_face(0.3, 0.3) == 1.0, "facing term at zero error != 1");
  ck.require(std::abs(r_face(0.0, M_PI) + 1.0) < 1e-12,
             "facing term at pi error != -1");
  ck.require(r_arrive(0.1, 0, cfg) == cfg.b0 + cfg.b1,
             "arrival bonus at t=0 != b0+b1");
  ck.require(r_arrive(0.1, cfg.t_max, cfg) == cfg.b0,
             "arrival bonus at t_max != b0");
  ck.require(std::abs(r_stable(1.0, 0.0, 0.0, cfg.z_star, 0.1, cfg) -
                      std::exp(-1.0)) < 1e-12,
             "stability e^{-1} case mismatch");
  double at0 = r_goal_dist(0.0, cfg);
  ck.require(std::abs(at0 - (1.0 + 0.5 * (1.0 - std::exp(-2.0)))) < 1e-12,
             "goal shaping at d=0 mismatch");
  return "1000 randomized states match an independent recomputation within "
         "1e-12; closed-form spot values exact";
}

// ---------------------------------------------------------------- criterion 4

std::string crit4(Checker& ck) {
  const int W = 10, S = 7, L = 10;
  for (int c = 0; c <= W; ++c) {
    int up = update_level(5, c, W, S, L);
    int expect = c >= S ? 6 : (c < W - S + 1 ? 4 : 5);
    ck.require(up == expect,
               "update rule mismatch at c=" + std::to_string(c));
  }
  ck.require(update_level(L - 1, W, W, S, L) == L - 1, "upper clamp broken");
  ck.require(update_level(0, 0, W, S, L) == 0, "lower clamp broken");

  CurriculumConfig ccfg;
  CurriculumState st(4, ccfg);
  Rng rng(321);
  for (int i = 0; i < 1000000; ++i) {
    st.record_outcome(static_cast<int>(rng.uniform_int(4)),
                      rng.uniform() < 0.5);
    for (int e = 0; e < 4; ++e) {
      int lv = st.level(e);
      ck.require(lv >= 0 && lv < ccfg.l_max, "level bound violated");
    }
  }

  for (int seed = 0; seed < 100; ++seed) {
    for (double p : {0.95, 0.05}) {
      Rng r2(hash_mix(seed, p > 0.5 ? 1 : 0));
      int level = 4;
      double drift = 0.0;
      for (int wnd = 0; wnd < 200; ++wnd) {
        int c = 0;
        for (int i = 0; i < W; ++i)
          if (r2.uniform() < p) ++c;
        int nl = update_level(level, c, W, S, L);
        drift += nl - level;
        level = nl;
      }
      ck.require(p > 0.5 ? drift >= 0.0 : drift <= 0.0,
                 "Monte-Carlo drift has the wrong sign");
    }
  }
  return "promotion/hold/demotion table exhaustive; 1e6-outcome fuzz keeps "
         "levels in bounds; drift signs correct over 100 seeds";
}

// ---------------------------------------------------------------- criterion 5

void gae_oracle(const VectorXd& r, const VectorXd& v,
                const std::vector<uint8_t>& term,
                const std::vector<uint8_t>& trunc, double gamma, double lambda,
                VectorXd* adv) {
  long T = r.size();
  adv->resize(T);
  for (long t = 0; t < T; ++t) {
    double acc = 0.0, w = 1.0;
    for (long k = t; k < T; ++k) {
      double delta = r[k] + gamma * v[k + 1] * (term[k] ? 0.0 : 1.0) - v[k];
      acc += w * delta;
      if (term[k] || trunc[k]) break;
      w *= gamma * lambda;
    }
    (*adv)[t] = acc;
  }
}

std::string crit5(Checker& ck) {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = 24;
    VectorXd r(T), v(T + 1), adv, ret, oracle;
    std::vector<uint8_t> term(T), trunc(T);
    for (int t = 0; t < T; ++t) {
      r[t] = rng.uniform(-2, 2);
      v[t] = rng.uniform(-2, 2);
      term[t] = rng.uniform() < 0.2 ? 1 : 0;
      trunc[t] = (!term[t] && rng.uniform() < 0.2) ? 1 : 0;
    }
    v[T] = rng.uniform(-2, 2);
    compute_gae(r, v, term, trunc, 0.99, 0.95, &adv, &ret);
    gae_oracle(r, v, term, trunc, 0.99, 0.95, &oracle);
    for (int t = 0; t < T; ++t)
      ck.require(std::abs(adv[t] - oracle[t]) < 1e-6,
                 "advantage deviates from the brute-force oracle");
  }

  // finite-difference gradient check on a toy recurrent policy
  PolicyNet net(5, 2, 4, -0.5, 17);
  const int T = 6, N = 4;
  RolloutBuffer buf;
  buf.allocate(T, N, net.obs_dim(), net.act_dim(), net.hidden());
  Rng dr(33);
  for (int i = 0; i < N; ++i)
    for (int h = 0; h < net.hidden(); ++h)
      buf.h_start(h, i) = dr.uniform(-0.5, 0.5);
  for (int k = 0; k < T * N; ++k) {
    for (int j = 0; j < net.obs_dim(); ++j) buf.obs(j, k) = dr.uniform(-1, 1);
    buf.rewards[k] = dr.uniform(-1, 1);
    buf.terminal[k] = dr.uniform() < 0.15 ? 1 : 0;
    buf.trunc[k] = (!buf.terminal[k] && dr.uniform() < 0.15) ? 1 : 0;
  }
  for (int i = 0; i < N; ++i) buf.bootstrap[i] = dr.uniform(-1, 1);
  // roll the behavior policy itself so ratios start exactly at 1 and the
  // objective is smooth around the current parameters
  {
    MatrixXd H = buf.h_start, X(net.obs_dim(), N), mu, Hn;
    VectorXd v;
    VectorXd sigma = net.log_std().array().exp();
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < N; ++i) X.col(i) = buf.obs.col(buf.idx(t, i));
      net.forward(X, H, &mu, &v, &Hn, nullptr);
      MatrixXd acts(net.act_dim(), N);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < net.act_dim(); ++j)
          acts(j, i) = mu(j, i) + sigma[j] * dr.normal();
      VectorXd logp = net.log_prob(mu, acts);
      for (int i = 0; i < N; ++i) {
        int k = buf.idx(t, i);
        buf.actions.col(k) = acts.col(i);
        buf.logp[k] = logp[i];
        buf.values[k] = v[i];
      }
      H = Hn;
      for (int i = 0; i < N; ++i)
        if (buf.terminal[buf.idx(t, i)] || buf.trunc[buf.idx(t, i)])
          H.col(i).setZero();
    }
  }
  compute_gae_buffer(buf, 0.99, 0.95);

  TrainerConfig tcfg;
  std::vector<int> envs{0, 1, 2, 3};
  VectorXd grad = VectorXd::Zero(net.param_count());
  ppo_minibatch_loss_grad(buf, envs, net, tcfg, &grad, nullptr);
  const double eps = 1e-6;
  for (int p = 0; p < net.param_count(); ++p) {
    double orig = net.params()[p];
    net.params()[p] = orig + eps;
    double lp = ppo_minibatch_loss_grad(buf, envs, net, tcfg, nullptr, nullptr);
    net.params()[p] = orig - eps;
    double lm = ppo_minibatch_loss_grad(buf, envs, net, tcfg, nullptr, nullptr);
    net.params()[p] = orig;
    double fd = (lp - lm) / (2.0 * eps);
    double denom = std::max({std::abs(fd), std::abs(grad[p]), 1e-6});
    ck.require(std::abs(fd - grad[p]) / denom < 1e-4,
               "analytic gradient deviates from finite differences at "
               "parameter " + std::to_string(p));
  }
  return "advantages match the O(T^2) oracle to 1e-6 on 1000 sequences; "
         "analytic gradients match central differences to 1e-4";
}

// ---------------------------------------------------------------- criterion 6

std::string crit6(Checker& ck) {
  auto run = [](int workers) {
    RunConfig cfg;
    cfg.trainer.workers = workers;  // 100 envs x 24 steps, seed 42 (defaults)
    cfg.resolve();
    auto env = std::make_unique<HierRolloutEnv>(cfg, cfg.trainer.n_envs,
                                                cfg.trainer.seed, workers);
    Trainer t(cfg, std::move(env), "");
    std::string log;
    for (int i = 0; i < 5; ++i)
      log += t.metrics_line(t.run_iteration()).dump() + "\n";
    return log;
  };
  std::string a = run(1);
  std::string b = run(1);
  ck.require(a == b, "repeated seed-42 runs differ");
  std::string c = run(4);
  ck.require(a == c, "metrics change with worker count");
  return "two seed-42 runs (100 envs x 24 steps, 5 iterations) are "
         "bit-identical and invariant to worker count";
}

// ---------------------------------------------------------------- criterion 7

std::string crit7(Checker& ck) {
  RunConfig cfg;
  cfg.env.families = {"rough"};
  cfg.trainer.n_envs = 8;
  cfg.trainer.seed = 1;
  cfg.trainer.max_iterations = 300;
  cfg.trainer.hidden = 64;
  cfg.trainer.rollout_t = 128;
  cfg.trainer.lr = 3e-4;
  cfg.trainer.entropy_coef = 1e-4;
  cfg.trainer.log_std_init = -1.5;
  cfg.resolve();
  cfg.validate();

  auto env = std::make_unique<HierRolloutEnv>(cfg, cfg.trainer.n_envs,
                                              cfg.trainer.seed, 1);
  Trainer trainer(cfg, std::move(env), "");
  double level0 = trainer.env().mean_level();
  for (int i = 0; i < cfg.trainer.max_iterations; ++i) trainer.run_iteration();
  double level1 = trainer.env().mean_level();

  NetEvalPolicy pol(trainer.policy());
  EvalReport rep = evaluate(cfg, pol, {Family::Rough}, {0}, 20, 123);
  double rate = rep.cells[0].rate();
  ck.require(rate >= 0.8, "evaluation success rate " + std::to_string(rate) +
                              " below 0.8 on the easiest rough tiles");
  ck.require(level1 > level0,
             "mean curriculum level did not increase (start " +
                 std::to_string(level0) + ", end " + std::to_string(level1) +
                 ")");
  std::ostringstream os;
  os << "300-iteration smoke run: eval success " << rate
     << " on the easiest rough tiles, mean curriculum level " << level0
     << " -> " << level1;
  return os.str();
}

// ---------------------------------------------------------------- criterion 8

std::string crit8(Checker& ck) {
  RunConfig cfg;
  cfg.resolve();
  const int K = 100;
  std::vector<Family> families(kAllFamilies.begin(), kAllFamilies.end());
  std::vector<int> levels{5, 6, 7, 8, 9};  // reported as 6-10

  GreedyEvalPolicy pol(Gait::kTrot);
  EvalReport rep = evaluate(cfg, pol, families, levels, K, 7);
  ck.require(rep.cells.size() == 25, "expected 25 (family, level) cells");
  ck.require(static_cast<int>(rep.episodes.size()) == 25 * K,
             "expected 2500 episodes");
  for (const auto& cell : rep.cells)
    ck.require(cell.k == K, "cell does not hold 100 episodes");
  for (const auto& ep : rep.episodes) {
    int total = 0;
    for (int g = 0; g < kNumGaits; ++g) total += ep.gait_hist[g];
    ck.require(total == ep.steps && ep.steps > 0,
               "gait histogram does not sum to the episode's steps");
  }
  nlohmann::json j = rep.to_json();
  ck.require(j.contains("cells") && j.contains("episodes"),
             "report serialization incomplete");

  // gait-capability ordering on the two discriminating cells (level 8)
  auto forced_successes = [&](Family fam, Gait g) {
    GreedyEvalPolicy p(g);
    EvalReport r =
        evaluate(cfg, p, {fam}, {7}, K, 7, static_cast<int>(g));
    return r.cells[0].successes;
  };
  int gap_bound = forced_successes(Family::Gap, Gait::kBound);
  int gap_trot = forced_successes(Family::Gap, Gait::kTrot);
  int stair_trot = forced_successes(Family::Stair, Gait::kTrot);
  int stair_bound = forced_successes(Family::Stair, Gait::kBound);
  ck.require(gap_bound > gap_trot,
             "bound does not beat trot on wide gaps (" +
                 std::to_string(gap_bound) + " vs " + std::to_string(gap_trot) +
                 ")");
  ck.require(stair_trot > stair_bound,
             "trot does not beat bound on tall stairs (" +
                 std::to_string(stair_trot) + " vs " +
                 std::to_string(stair_bound) + ")");
  std::ostringstream os;
  os << "full protocol shape (5 families x 5 levels x 100 episodes) emitted; "
     << "gap level 8: bound " << gap_bound << "/100 vs trot " << gap_trot
     << "/100; stair level 8: trot " << stair_trot << "/100 vs bound "
     << stair_bound << "/100 (full-scale success figures from GPU-physics "
     << "training are out of reach for this surrogate stack by design)";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1-8>\n", argv[0]);
    return 2;
  }
  int n = std::atoi(argv[1]);
  if (n < 1 || n > 8) {
    std::fprintf(stderr, "criterion must be 1-8\n");
    return 2;
  }
  Checker ck;
  std::string summary;
  try {
    switch (n) {
      case 1: summary = crit1(ck); break;
      case 2: summary = crit2(ck); break;
      case 3: summary = crit3(ck); break;
      case 4: summary = crit4(ck); break;
      case 5: summary = crit5(ck); break;
      case 6: summary = crit6(ck); break;
      case 7: summary = crit7(ck); break;
      case 8: summary = crit8(ck); break;
    }
  } catch (const std::exception& e) {
    std::printf("FAIL criterion %d: unhandled exception: %s\n", n, e.what());
    return 1;
  }
  if (ck.failures > 0) {
    std::printf("FAIL criterion %d: %d check(s) failed; first: %s\n", n,
                ck.failures, ck.first_failure.c_str());
    return 1;
  }
  std::printf("PASS criterion %d: %s\n", n, summary.c_str());
  return 0;
}

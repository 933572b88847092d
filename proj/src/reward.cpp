#include "quadnav/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadnav {

double RewardBreakdown::raw_of(const std::string& name) const {
  for (const Term& t : terms)
    if (t.name == name) return t.raw;
  throw std::runtime_error("no reward term named " + name);
}

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

void HighLevelRewardConfig::validate() const {
  if (!(step_dt > 0.0)) throw std::runtime_error("step_dt must be positive");
  if (!(r_map >= 0.0)) throw std::runtime_error("r_map must be non-negative");
  if (!(shape_a > 0.0 && shape_b > 0.0))
    throw std::runtime_error("shape_a/shape_b must be positive");
  if (!(d0 > 0.0)) throw std::runtime_error("d0 must be positive");
  if (!(sigma_z > 0.0)) throw std::runtime_error("sigma_z must be positive");
  if (t_max <= 0) throw std::runtime_error("t_max must be positive");
}

double scale_weight(double w, double step_dt) {
  if (!(step_dt > 0.0)) throw std::runtime_error("step_dt must be positive");
  return w * step_dt;
}

double r_goal_dist(double d_t, const HighLevelRewardConfig& cfg) {
  if (!(cfg.r_map > 0.0))
    throw std::runtime_error("r_map must be resolved to a positive value");
  double p = std::clamp(1.0 - d_t / cfg.r_map, 0.0, 1.0);
  return p + cfg.shape_a * (1.0 - std::exp(-cfg.shape_b * p));
}

double r_face(double yaw, double yaw_star) { return std::cos(yaw_star - yaw); }

double r_arrive(double d_t, int t, const HighLevelRewardConfig& cfg) {
  if (d_t >= cfg.d0) return 0.0;
  double alpha = std::clamp(1.0 - static_cast<double>(t) / cfg.t_max, 0.0, 1.0);
  return cfg.b0 + cfg.b1 * alpha;
}

double r_stable(double lin_vel_norm, double ang_vel_norm, double joint_vel_norm,
                double z, double d_t, const HighLevelRewardConfig& cfg) {
  if (d_t >= cfg.d0) return 0.0;
  double eta = lin_vel_norm + ang_vel_norm + cfg.beta * joint_vel_norm;
  double dz = z - cfg.z_star;
  return std::exp(-eta) * std::exp(-dz * dz / cfg.sigma_z);
}

SmoothnessTerms r_smoothness(const std::array<double, kActionDim>& a,
                             const std::array<double, kActionDim>& a_prev,
                             const std::array<double, kCommandDim>& u,
                             const std::array<double, kCommandDim>& u_prev,
                             const std::array<double, kCommandDim>& u_prev2) {
  SmoothnessTerms out;
  for (int j = 0; j < kActionDim; ++j) {
    double da = a[j] - a_prev[j];
    out.action_rate += da * da;
  }
  for (int j = 0; j < kCommandDim; ++j) {
    double d1 = u[j] - u_prev[j];
    double d1_prev = u_prev[j] - u_prev2[j];
    double d2 = d1 - d1_prev;
    out.cmd_sm1 += d1 * d1;
    out.cmd_sm2 += d2 * d2;
  }
  out.cmd_sm1 /= kCommandDim;
  out.cmd_sm2 /= kCommandDim;
  return out;
}

SafetyLivenessTerms r_safety_liveness(const std::vector<Vec3>& contact_forces,
                                      double d_t, double planar_speed,
                                      const HighLevelRewardConfig& cfg) {
  SafetyLivenessTerms out;
  for (const Vec3& f : contact_forces)
    out.col += std::max(0.0, f.norm() - cfg.f_th);
  out.lazy = (d_t > cfg.d0 && planar_speed < cfg.v_th) ? 1.0 : 0.0;
  out.alive = 1.0;
  return out;
}

RewardBreakdown high_level_reward(const HighLevelRewardInputs& in,
                                  const HighLevelRewardConfig& cfg) {
  cfg.validate();
  const HighLevelRewardWeights& w = cfg.weights;
  double dt = cfg.step_dt;
  RewardBreakdown b;
  b.add("goal_dist", r_goal_dist(in.d_t, cfg), scale_weight(w.goal_dist, dt));
  b.add("face", r_face(in.yaw, in.yaw_star), scale_weight(w.face, dt));
  b.add("arrive", r_arrive(in.d_t, in.t, cfg), scale_weight(w.arrive, dt));
  b.add("stable",
        r_stable(in.lin_vel_norm, in.ang_vel_norm, in.joint_vel_norm, in.z,
                 in.d_t, cfg),
        scale_weight(w.stable, dt));
  SmoothnessTerms sm =
      r_smoothness(in.action, in.action_prev, in.cmd, in.cmd_prev, in.cmd_prev2);
  b.add("action_rate", sm.action_rate, scale_weight(w.action_rate, dt));
  b.add("cmd_sm1", sm.cmd_sm1, scale_weight(w.cmd_sm1, dt));
  b.add("cmd_sm2", sm.cmd_sm2, scale_weight(w.cmd_sm2, dt));
  SafetyLivenessTerms sl =
      r_safety_liveness(in.contact_forces, in.d_t, in.planar_speed, cfg);
  b.add("col", sl.col, scale_weight(w.col, dt));
  b.add("lazy", sl.lazy, scale_weight(w.lazy, dt));
  b.add("alive", sl.alive, scale_weight(w.alive, dt));
  return b;
}

}  // namespace quadnav

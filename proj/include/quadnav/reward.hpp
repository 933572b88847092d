#pragma once

#include <string>
#include <vector>

#include "quadnav/decoder.hpp"

namespace quadnav {

// Per-term reward record for one step at either MDP level.
// total == sum(weight_eff * raw) by construction.
struct RewardBreakdown {
  struct Term {
    std::string name;
    double raw = 0.0;
    double weight_eff = 0.0;
  };
  std::vector<Term> terms;
  double total = 0.0;

  void add(const std::string& name, double raw, double weight_eff) {
    terms.push_back({name, raw, weight_eff});
    total += weight_eff * raw;
  }
  double raw_of(const std::string& name) const;
};

struct HighLevelRewardWeights {
  double goal_dist = 1.0;
  double face = 0.3;
  double arrive = 1.0;
  double stable = 0.5;
  double action_rate = -0.01;
  double cmd_sm1 = -0.05;
  double cmd_sm2 = -0.02;
  double col = -0.1;
  double lazy = -0.5;
  double alive = 0.02;
};

struct HighLevelRewardConfig {
  HighLevelRewardWeights weights;
  double step_dt = 0.2;   // high-level decision period, s
  double r_map = 0.0;     // distance normalization; 0 = use tile diagonal
  double shape_a = 0.5;
  double shape_b = 2.0;
  double d0 = 0.5;        // goal region radius, m
  double b0 = 10.0;
  double b1 = 10.0;
  int t_max = 150;        // episode horizon, decision steps
  double sigma_z = 0.01;  // m^2
  double z_star = 0.28;   // m
  double beta = 0.1;
  double f_th = 40.0;     // N
  double v_th = 0.1;      // m/s

  void validate() const;  // throws std::runtime_error on bad constants
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  double norm() const;
};

// All step-local quantities the high-level reward reads.
struct HighLevelRewardInputs {
  double d_t = 0.0;             // distance to goal, m
  int t = 0;                    // decision step index
  double yaw = 0.0;             // rad
  double yaw_star = 0.0;        // desired yaw toward goal, rad
  double lin_vel_norm = 0.0;    // |v^lin|
  double ang_vel_norm = 0.0;    // |v^ang|
  double joint_vel_norm = 0.0;  // |qdot|
  double z = 0.0;               // base height above local ground, m
  double planar_speed = 0.0;    // laziness check, m/s
  std::vector<Vec3> contact_forces;
  std::array<double, kActionDim> action{};
  std::array<double, kActionDim> action_prev{};
  std::array<double, kCommandDim> cmd{};
  std::array<double, kCommandDim> cmd_prev{};
  std::array<double, kCommandDim> cmd_prev2{};
};

double scale_weight(double w, double step_dt);

double r_goal_dist(double d_t, const HighLevelRewardConfig& cfg);
double r_face(double yaw, double yaw_star);
double r_arrive(double d_t, int t, const HighLevelRewardConfig& cfg);
double r_stable(double lin_vel_norm, double ang_vel_norm, double joint_vel_norm,
                double z, double d_t, const HighLevelRewardConfig& cfg);

struct SmoothnessTerms {
  double action_rate = 0.0;
  double cmd_sm1 = 0.0;
  double cmd_sm2 = 0.0;
};
SmoothnessTerms r_smoothness(const std::array<double, kActionDim>& a,
                             const std::array<double, kActionDim>& a_prev,
                             const std::array<double, kCommandDim>& u,
                             const std::array<double, kCommandDim>& u_prev,
                             const std::array<double, kCommandDim>& u_prev2);

struct SafetyLivenessTerms {
  double col = 0.0;
  double lazy = 0.0;
  double alive = 1.0;
};
SafetyLivenessTerms r_safety_liveness(const std::vector<Vec3>& contact_forces,
                                      double d_t, double planar_speed,
                                      const HighLevelRewardConfig& cfg);

// Full step reward with per-term breakdown retained for logging.
RewardBreakdown high_level_reward(const HighLevelRewardInputs& in,
                                  const HighLevelRewardConfig& cfg);

}  // namespace quadnav

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quadnav/lowlevel.hpp"
#include "quadnav/rng.hpp"

using namespace quadnav;

namespace {

CommandVector make_command(double vx, double vy, double wz, double height,
                           int gait, double freq = 2.0) {
  CommandVector c;
  c.continuous[kChVx] = vx;
  c.continuous[kChVy] = vy;
  c.continuous[kChOmegaZ] = wz;
  c.continuous[kChBodyHeight] = height;
  c.continuous[kChGaitFreq] = freq;
  c.gait_index = gait;
  c.gait_embedding = gait_embedding(gait);
  return c;
}

HeightField flat_field() {
  TerrainConfig cfg;
  return generate_heightfield(Family::Rough, 0.0, 1, cfg);
}

RobotState start_state(const HeightField& f, double x = 2.0, double y = 2.0) {
  RobotState s;
  s.x = x;
  s.y = y;
  s.z = query_height(f, x, y) + 0.28;
  s.contact_force = 25.0;
  return s;
}

}  // namespace

TEST_CASE("phase clock wraps and is linear in dt") {
  PhaseClock c;
  c.phase = 0.9;
  c.frequency = 2.0;
  PhaseClock c2 = advance_phase(c, 0.1);
  CHECK(c2.phase == doctest::Approx(0.1).epsilon(1e-12));
  PhaseClock c3 = advance_phase(c, 1e-5);
  CHECK(c3.phase - c.phase == doctest::Approx(2.0 * 1e-5).epsilon(1e-9));
  CHECK_THROWS_AS(advance_phase(c, 0.0), std::domain_error);
  CHECK_THROWS_AS(advance_phase(c, -0.1), std::domain_error);
}

TEST_CASE("trot puts diagonal pairs half a cycle apart") {
  auto p = leg_phases(0.0, gait_embedding(kTrot));
  CHECK(p[0] == doctest::Approx(0.0));   // FL
  CHECK(p[1] == doctest::Approx(0.5));   // FR
  CHECK(p[2] == doctest::Approx(0.5));   // RL
  CHECK(p[3] == doctest::Approx(0.0));   // RR
  // pronk: all legs in phase
  p = leg_phases(0.25, gait_embedding(kPronk));
  for (double v : p) CHECK(v == doctest::Approx(0.25));
  // bound: front/rear pairs offset
  p = leg_phases(0.0, gait_embedding(kBound));
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(0.0));
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[3] == doctest::Approx(0.5));
}

TEST_CASE("action mapper clipping and bounds") {
  ActionMapper m;
  JointVec a{};
  CHECK(map_action(a, m) == m.nominal_pose_q0);
  a.fill(10.0);
  JointVec q = map_action(a, m);
  for (int j = 0; j < kNumJoints; ++j)
    CHECK(q[j] == doctest::Approx(m.nominal_pose_q0[j] + 0.25).epsilon(1e-15));
  a.fill(-0.5);
  q = map_action(a, m);
  for (int j = 0; j < kNumJoints; ++j)
    CHECK(q[j] == doctest::Approx(m.nominal_pose_q0[j] - 0.125).epsilon(1e-15));

  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    for (auto& v : a) v = rng.uniform(-20, 20);
    q = map_action(a, m);
    for (int j = 0; j < kNumJoints; ++j)
      CHECK(std::abs(q[j] - m.nominal_pose_q0[j]) <=
            m.scale_alpha * m.a_max + 1e-15);
  }
}

TEST_CASE("low-level observation layout") {
  ProprioState prop;
  JointVec zero{};
  CommandVector c = make_command(0, 0, 0, 0.28, kPronk);
  PhaseClock clock;
  clock.phase = 0.0;
  LowLevelObs o = build_obs(prop, zero, zero, c, clock);
  // zeros except g^b slot, command slots, and gait one-hot
  CHECK(o.values[2] == -1.0);
  CHECK(o.values[0] == 0.0);
  for (int j = 3; j < 3 + 48; ++j) CHECK(o.values[j] == 0.0);
  // gait one-hot is the last 4 entries
  CHECK(o.values[kLowLevelObsDim - 4 + kPronk] == 1.0);
  CHECK(o.values[kLowLevelObsDim - 4 + kTrot] == 0.0);

  LowLevelObs o2 = build_obs(prop, zero, zero, c, clock);
  CHECK(o.values == o2.values);

  // permuting joints permutes only the matching slots
  ProprioState permuted = prop;
  permuted.joint_pos_err[0] = 1.0;
  permuted.joint_pos_err[5] = 2.0;
  LowLevelObs op = build_obs(permuted, zero, zero, c, clock);
  CHECK(op.values[3 + 0] == 1.0);
  CHECK(op.values[3 + 5] == 2.0);
  for (int j = 0; j < kLowLevelObsDim; ++j)
    if (j != 3 && j != 8) CHECK(op.values[j] == o.values[j]);
}

TEST_CASE("low-level tracking rewards") {
  LowLevelConfig cfg;
  ProprioState prop;
  CommandVector c = make_command(0.5, 0.1, 0.3, 0.28, kTrot);
  prop.base_lin_vel = {0.5, 0.1, 0.0};
  prop.base_ang_vel = {0.0, 0.0, 0.3};
  JointVec a{}, ap{};
  RewardBreakdown b = reward_lowlevel(prop, c, a, ap, cfg);
  CHECK(b.raw_of("lin") == doctest::Approx(1.0));
  CHECK(b.raw_of("yaw") == doctest::Approx(1.0));

  // squared error equal to sigma -> e^{-1}
  prop.base_lin_vel = {0.5 + std::sqrt(cfg.sigma_lin), 0.1, 0.0};
  b = reward_lowlevel(prop, c, a, ap, cfg);
  CHECK(b.raw_of("lin") == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // oracle recomputation over random states
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    ProprioState p;
    for (auto& v : p.base_lin_vel) v = rng.uniform(-1, 1);
    for (auto& v : p.base_ang_vel) v = rng.uniform(-1, 1);
    for (auto& v : p.joint_vel) v = rng.uniform(-3, 3);
    p.gravity_dir_body = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                          -1.0};
    JointVec act, act_prev;
    for (auto& v : act) v = rng.uniform(-1, 1);
    for (auto& v : act_prev) v = rng.uniform(-1, 1);
    RewardBreakdown rb = reward_lowlevel(p, c, act, act_prev, cfg);

    double evx = p.base_lin_vel[0] - c.continuous[kChVx];
    double evy = p.base_lin_vel[1] - c.continuous[kChVy];
    double ew = p.base_ang_vel[2] - c.continuous[kChOmegaZ];
    double gx = p.gravity_dir_body[0], gy = p.gravity_dir_body[1],
           gz = p.gravity_dir_body[2] + 1.0;
    double smooth = 0.0, energy = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      smooth += (act[j] - act_prev[j]) * (act[j] - act_prev[j]);
      energy += p.joint_vel[j] * p.joint_vel[j];
    }
    double expect =
        cfg.weights.lin * std::exp(-(evx * evx + evy * evy) / cfg.sigma_lin) +
        cfg.weights.yaw * std::exp(-ew * ew / cfg.sigma_yaw) +
        cfg.weights.stab * (gx * gx + gy * gy + gz * gz) +
        cfg.weights.smooth * smooth + cfg.weights.energy * energy;
    CHECK(std::abs(rb.total - expect) < 1e-12);
    CHECK(rb.raw_of("lin") > 0.0);
    CHECK(rb.raw_of("lin") <= 1.0);
    CHECK(rb.raw_of("smooth") >= 0.0);
    CHECK(rb.raw_of("energy") >= 0.0);
  }
}

TEST_CASE("surrogate equilibrium at zero command") {
  HeightField f = flat_field();
  SurrogateConfig cfg;
  CommandVector c = make_command(0, 0, 0, 0.28, kTrot);
  RobotState s = start_state(f);
  for (int i = 0; i < 200; ++i) s = surrogate_executor_step(s, c, 0.02, f, cfg);
  CHECK(s.x == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.y == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(s.z - (query_height(f, s.x, s.y) + 0.28)) < 1e-6);
  CHECK_FALSE(s.falling);
}

TEST_CASE("surrogate displacement matches the first-order-lag closed form") {
  HeightField f = flat_field();
  SurrogateConfig cfg;
  CommandVector c = make_command(0.5, 0, 0, 0.28, kTrot);
  RobotState s = start_state(f, 1.5, 2.0);
  const double dt = 0.02;
  const int n = 100;  // 2 s
  for (int i = 0; i < n; ++i) s = surrogate_executor_step(s, c, dt, f, cfg);
  // v_m = v_cmd (1 - e^{-m dt/tau}); x advances with the updated velocity
  double expect = 0.0;
  for (int m = 1; m <= n; ++m)
    expect += dt * 0.5 * (1.0 - std::exp(-m * dt / cfg.tau_v));
  CHECK(s.x - 1.5 == doctest::Approx(expect).epsilon(1e-9));
  // bounded by the lag transient: within v*tau of the steady-state ramp
  CHECK(std::abs((s.x - 1.5) - (0.5 * n * dt)) < 0.5 * cfg.tau_v + 1e-9);
}

TEST_CASE("surrogate determinism") {
  HeightField f = flat_field();
  SurrogateConfig cfg;
  CommandVector c = make_command(0.4, 0.1, 0.2, 0.30, kPace);
  RobotState a = start_state(f), b = start_state(f);
  for (int i = 0; i < 50; ++i) {
    a = surrogate_executor_step(a, c, 0.02, f, cfg);
    b = surrogate_executor_step(b, c, 0.02, f, cfg);
  }
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
  CHECK(a.yaw == b.yaw);
}

TEST_CASE("gait capability at gaps: bound crosses, trot falls") {
  TerrainConfig tcfg;
  // level 8 of 10 -> d = 7/9
  HeightField f = generate_heightfield(Family::Gap, 7.0 / 9.0, 4, tcfg);
  SurrogateConfig cfg;
  auto run = [&](int gait) {
    CommandVector c = make_command(0.8, 0, 0, 0.28, gait);
    RobotState s = start_state(f, 1.0, 2.0);
    for (int i = 0; i < 800; ++i) {
      s = surrogate_executor_step(s, c, 0.02, f, cfg);
      if (s.falling || s.out_of_bounds) break;
    }
    return s;
  };
  RobotState bound = run(kBound);
  CHECK_FALSE(bound.falling);
  CHECK(bound.x > tcfg.length_m - 1.5);  // reached the far side
  RobotState trot = run(kTrot);
  CHECK(trot.falling);
}

TEST_CASE("gait capability at stairs: trot climbs, bound is blocked") {
  TerrainConfig tcfg;
  HeightField f = generate_heightfield(Family::Stair, 7.0 / 9.0, 4, tcfg);
  SurrogateConfig cfg;
  auto run = [&](int gait) {
    CommandVector c = make_command(0.8, 0, 0, 0.28, gait);
    RobotState s = start_state(f, 1.0, 2.0);
    for (int i = 0; i < 800; ++i) {
      s = surrogate_executor_step(s, c, 0.02, f, cfg);
      if (s.falling || s.out_of_bounds) break;
    }
    return s;
  };
  RobotState trot = run(kTrot);
  CHECK_FALSE(trot.falling);
  CHECK(trot.x > tcfg.length_m - 1.5);
  RobotState bound = run(kBound);
  CHECK_FALSE(bound.falling);
  CHECK(bound.x < tcfg.length_m / 2.0);  // stuck at the first tall step
}

TEST_CASE("wall-height rises report a collision force") {
  // head-on approach to a wall taller than the addressable step height
  HeightField f = flat_field();
  for (int ix = 0; ix < f.nx; ++ix) {
    double x = f.cell_x(ix);
    if (x < 4.0 || x > 4.3) continue;
    for (int iy = 0; iy < f.ny; ++iy) f.heights[f.idx(ix, iy)] = 0.6;
  }
  SurrogateConfig cfg;
  CommandVector c = make_command(1.0, 0, 0, 0.28, kTrot);
  bool collided = false;
  RobotState s = start_state(f, 2.0, 2.0);
  for (int i = 0; i < 400; ++i) {
    s = surrogate_executor_step(s, c, 0.02, f, cfg);
    if (s.contact_force >= cfg.collision_force) {
      collided = true;
      break;
    }
    if (s.out_of_bounds) break;
  }
  CHECK(collided);
  CHECK(s.x < 4.0);  // stopped in front of the wall
}

TEST_CASE("falling drives height below the fall threshold quickly") {
  HeightField f = flat_field();
  SurrogateConfig cfg;
  CommandVector c = make_command(0, 0, 0, 0.28, kTrot);
  RobotState s = start_state(f);
  s.falling = true;
  int steps = 0;
  while (s.z - query_height(f, s.x, s.y) >= 0.15 && steps < 100) {
    s = surrogate_executor_step(s, c, 0.02, f, cfg);
    ++steps;
  }
  CHECK(steps <= 10);  // within one decision period
  CHECK(s.contact_force == 0.0);
}

TEST_CASE("lateral slope beyond gait tolerance causes a fall") {
  TerrainConfig tcfg;
  HeightField f = generate_heightfield(Family::Tilt, 1.0, 6, tcfg);  // 0.35 rad
  SurrogateConfig cfg;
  auto run = [&](int gait) {
    CommandVector c = make_command(0.8, 0, 0, 0.28, gait);
    RobotState s = start_state(f, 1.0, 2.0);
    for (int i = 0; i < 800; ++i) {
      s = surrogate_executor_step(s, c, 0.02, f, cfg);
      if (s.falling || s.out_of_bounds) break;
    }
    return s;
  };
  CHECK(run(kBound).falling);       // tolerance 0.15 < 0.35
  CHECK_FALSE(run(kPace).falling);  // tolerance 0.35 holds at the boundary
}

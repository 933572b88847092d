#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quadnav/curriculum.hpp"
#include "quadnav/rng.hpp"

using namespace quadnav;

TEST_CASE("update rule: exhaustive table for W=10, S=7") {
  const int W = 10, S = 7, L = 10;
  for (int c = 0; c <= W; ++c) {
    int up = update_level(5, c, W, S, L);
    // c >= 7 promotes, c < 4 demotes, hold band {4,5,6}
    if (c >= S)
      CHECK(up == 6);
    else if (c < W - S + 1)
      CHECK(up == 4);
    else
      CHECK(up == 5);
  }
  CHECK(update_level(9, S, W, S, L) == 9);   // upper clamp
  CHECK(update_level(0, 0, W, S, L) == 0);   // lower clamp
  CHECK_THROWS(update_level(5, -1, W, S, L));
  CHECK_THROWS(update_level(5, W + 1, W, S, L));
}

TEST_CASE("level bounds never violated under outcome fuzz") {
  CurriculumConfig cfg;
  CurriculumState st(4, cfg);
  Rng rng(321);
  for (int i = 0; i < 1000000; ++i) {
    int env = static_cast<int>(rng.uniform_int(4));
    bool success = rng.uniform() < 0.5;
    st.record_outcome(env, success);
    int lv = st.level(env);
    REQUIRE(lv >= 0);
    REQUIRE(lv < cfg.l_max);
    REQUIRE(st.window_fill(env) < cfg.window_len);
  }
}

TEST_CASE("window mechanics: growth, promotion, demotion, clearing") {
  CurriculumConfig cfg;
  CurriculumState st(1, cfg);
  // partial window leaves the level alone
  for (int i = 0; i < cfg.window_len - 1; ++i) {
    auto r = st.record_outcome(0, true);
    CHECK_FALSE(r.has_value());
    CHECK(st.level(0) == 0);
    CHECK(st.window_fill(0) == i + 1);
  }
  // tenth outcome fills the window: all successes promote and clear
  auto r = st.record_outcome(0, true);
  REQUIRE(r.has_value());
  CHECK(*r == 1);
  CHECK(st.window_fill(0) == 0);
  // all failures demote back and clear
  for (int i = 0; i < cfg.window_len - 1; ++i) st.record_outcome(0, false);
  r = st.record_outcome(0, false);
  REQUIRE(r.has_value());
  CHECK(*r == 0);
  CHECK(st.window_fill(0) == 0);

  CHECK_THROWS_AS(st.record_outcome(1, true), std::domain_error);
  CHECK_THROWS_AS(st.record_outcome(-1, true), std::domain_error);
}

TEST_CASE("environments are independent") {
  CurriculumConfig cfg;
  CurriculumState st(3, cfg);
  for (int i = 0; i < cfg.window_len; ++i) st.record_outcome(1, true);
  CHECK(st.level(0) == 0);
  CHECK(st.level(1) == 1);
  CHECK(st.level(2) == 0);
  CHECK(st.window_fill(0) == 0);
  CHECK(st.window_fill(2) == 0);
}

TEST_CASE("Monte-Carlo drift signs under biased success probabilities") {
  CurriculumConfig cfg;
  for (int seed = 0; seed < 100; ++seed) {
    for (double p : {0.95, 0.05}) {
      Rng rng(hash_mix(seed, p > 0.5 ? 1 : 0));
      int level = 4;
      double drift = 0.0;
      for (int wnd = 0; wnd < 200; ++wnd) {
        int c = 0;
        for (int i = 0; i < cfg.window_len; ++i)
          if (rng.uniform() < p) ++c;
        int nl = update_level(level, c, cfg.window_len, cfg.threshold_s,
                              cfg.l_max);
        drift += nl - level;
        level = nl;
      }
      if (p > 0.5)
        CHECK(drift >= 0.0);
      else
        CHECK(drift <= 0.0);
    }
  }
}

TEST_CASE("config validation and hold band helper") {
  CurriculumConfig cfg;
  CHECK_FALSE(cfg.hold_band_empty());
  cfg.validate();
  CurriculumConfig tight = cfg;
  tight.threshold_s = 5;  // S <= (W+1)/2: bands adjacent, no hysteresis
  CHECK(tight.hold_band_empty());
  CurriculumConfig bad = cfg;
  bad.threshold_s = 0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.threshold_s = cfg.window_len + 1;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.init = "sideways";
  CHECK_THROWS(bad.validate());
}

TEST_CASE("uniform init seeds a mixture of levels") {
  CurriculumConfig cfg;
  cfg.init = "uniform";
  CurriculumState st(256, cfg, 12);
  auto hist = st.level_histogram();
  int nonzero = 0;
  for (int h : hist) nonzero += h > 0 ? 1 : 0;
  CHECK(nonzero >= 8);
  CHECK(st.mean_level() > 1.0);
}

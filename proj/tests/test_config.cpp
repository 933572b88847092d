#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "quadnav/config.hpp"

using namespace quadnav;

TEST_CASE("default config validates and round-trips") {
  RunConfig cfg;
  cfg.resolve();
  cfg.validate();
  nlohmann::json j = cfg.to_json();
  RunConfig back = RunConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.hash() == cfg.hash());
}

TEST_CASE("file round trip") {
  RunConfig cfg;
  cfg.trainer.n_envs = 8;
  cfg.trainer.seed = 99;
  cfg.resolve();
  cfg.save("/tmp/quadnav_test_config.json");
  RunConfig back = RunConfig::load("/tmp/quadnav_test_config.json");
  CHECK(back.trainer.n_envs == 8);
  CHECK(back.trainer.seed == 99);
  CHECK(back.hash() == cfg.hash());
}

TEST_CASE("unknown keys rejected at every level") {
  RunConfig cfg;
  cfg.resolve();
  nlohmann::json j = cfg.to_json();
  j["mystery"] = 1;
  CHECK_THROWS_WITH_AS(RunConfig::from_json(j),
                       doctest::Contains("mystery"), std::runtime_error);
  j = cfg.to_json();
  j["trainer"]["learning_rate"] = 0.1;  // wrong spelling
  CHECK_THROWS(RunConfig::from_json(j));
  j = cfg.to_json();
  j["terrain"]["rough"]["amplitude"] = 0.3;
  CHECK_THROWS(RunConfig::from_json(j));
  j = cfg.to_json();
  j["surrogate"]["capability"]["gallop"] = {{"max_step", 1.0}};
  CHECK_THROWS(RunConfig::from_json(j));
}

TEST_CASE("hash is sensitive to value changes") {
  RunConfig a, b;
  a.resolve();
  b.resolve();
  CHECK(a.hash() == b.hash());
  b.trainer.lr = 3e-4;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("resolve syncs derived reward/curriculum fields") {
  RunConfig cfg;
  cfg.env.k_substeps = 5;
  cfg.env.dt_phys = 0.04;
  cfg.env.t_max = 99;
  cfg.terrain.l_max = 6;
  cfg.env.reach_dist = 0.7;
  cfg.resolve();
  CHECK(cfg.reward.step_dt == doctest::Approx(0.2));
  CHECK(cfg.reward.t_max == 99);
  CHECK(cfg.curriculum.l_max == 6);
  CHECK(cfg.reward.d0 == 0.7);
}

TEST_CASE("invalid configs fail before use") {
  RunConfig cfg;
  cfg.resolve();
  cfg.trainer.n_envs = 10;
  cfg.trainer.minibatches = 4;  // 10 % 4 != 0
  CHECK_THROWS(cfg.validate());
  cfg = RunConfig{};
  cfg.resolve();
  cfg.env.families = {"lava"};
  CHECK_THROWS(cfg.validate());
  cfg = RunConfig{};
  cfg.resolve();
  cfg.trainer.clip_eps = 1.5;
  CHECK_THROWS(cfg.validate());
}

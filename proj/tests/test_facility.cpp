#include <doctest.h>

#include <vector>

#include "dcflex/errors.hpp"
#include "dcflex/facility.hpp"

using namespace dcflex;

TEST_SUITE("facility") {

TEST_CASE("per-GPU active power is the node headroom split across its GPUs") {
  DataCenterConfig cfg;
  CHECK(gpu_active_power(cfg) == doctest::Approx(0.525).epsilon(1e-12));

  cfg.node_max_kw = 1.0;
  cfg.node_idle_kw = 1.0;
  CHECK(gpu_active_power(cfg) == 0.0);

  cfg.node_max_kw = 2.9;
  cfg.node_idle_kw = 0.9;
  cfg.gpus_per_node = 8;
  CHECK(gpu_active_power(cfg) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("total power adds the draw of running jobs to idle power of every node") {
  const DataCenterConfig cfg;
  CHECK(total_power({}, cfg) == doctest::Approx(90.0));
  const std::vector<ActiveLoad> one{{4, 0.6}};
  CHECK(total_power(one, cfg) == doctest::Approx(90.0 + 4 * 0.6 * 0.525));
  CHECK(total_power(one, cfg) == doctest::Approx(91.26));
  const std::vector<ActiveLoad> full{{400, 1.0}};
  CHECK(total_power(full, cfg) == doctest::Approx(cfg.node_max_kw * cfg.num_nodes));
  CHECK(total_power(full, cfg) == doctest::Approx(300.0));
}

TEST_CASE("energy cost includes cooling") {
  CHECK(energy_cost(176.0, 0.45, 0.4) == doctest::Approx(1.4 * 0.45 * 176.0));
  CHECK(energy_cost(176.0, 0.45, 0.4) == doctest::Approx(110.88));
  CHECK(energy_cost(250.0, 0.0, 0.4) == 0.0);
  CHECK(energy_cost(90.0, 1.35, 0.4) == doctest::Approx(170.10));
  CHECK(energy_cost(90.0, 1.35, 0.4, 2.0) == doctest::Approx(340.20));
}

TEST_CASE("invalid facility parameters are rejected") {
  DataCenterConfig cfg;
  cfg.gpus_per_node = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.num_nodes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.node_idle_kw = 4.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(DataCenterConfig{}.validate());
}

}

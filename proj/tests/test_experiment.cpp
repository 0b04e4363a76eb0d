#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dcflex/config.hpp"
#include "dcflex/errors.hpp"
#include "dcflex/experiment.hpp"

using namespace dcflex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dcflex_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ScenarioConfig small_scenario(const fs::path& out) {
  ScenarioConfig cfg;
  cfg.workload.num_jobs = 40;
  cfg.horizon_h = 72;
  cfg.workload.arrival_span = 48;
  cfg.seeds = {1, 2};
  cfg.out_dir = out.string();
  cfg.solver.node_limit = 500;
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("defaults describe the reference facility and workload") {
  const ScenarioConfig cfg;
  CHECK(cfg.horizon_h == 120);
  CHECK(cfg.window_h == 24);
  CHECK(cfg.facility.num_nodes == 100);
  CHECK(cfg.facility.gpus_per_node == 4);
  CHECK(cfg.facility.max_wait_h == 30);
  CHECK(cfg.workload.num_jobs == 150);
  CHECK(cfg.price_base == 0.45);
  CHECK(cfg.peak_multiplier == 3.0);
  CHECK(cfg.peak_interval() == Interval{60, 61});
  CHECK(cfg.all_interval() == Interval{24, 96});
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config files, overrides and errors") {
  std::istringstream in(
      "# comment\n"
      "num_jobs = 80   # trailing comment\n"
      "peak_multiplier = 300\n"
      "peak_duration_h = 10\n"
      "util_mode = fixed:0.6\n"
      "gpu_mode = poisson:20\n"
      "seeds = 1-3, 7\n"
      "scheduler = milp\n"
      "sweep_axis = num_jobs\n"
      "sweep_values = 100,200\n");
  auto parsed = parse_config(in);
  const auto& sc = parsed.scenario;
  CHECK(sc.workload.num_jobs == 80);
  CHECK(sc.peak_multiplier == 300.0);
  CHECK(sc.peak_interval() == Interval{55, 65});
  CHECK(std::get<FixedUtil>(sc.workload.util).value == 0.6);
  CHECK(std::get<PoissonGpus>(sc.workload.gpus).mean == 20.0);
  CHECK(sc.seeds == std::vector<std::uint64_t>{1, 2, 3, 7});
  CHECK(sc.schedulers == std::vector<SchedulerKind>{SchedulerKind::kMilp});
  CHECK(parsed.sweep_axis == "num_jobs");
  CHECK(parsed.sweep_values == std::vector<std::string>{"100", "200"});

  apply_override(parsed, "num_jobs=120");
  CHECK(parsed.scenario.workload.num_jobs == 120);

  std::istringstream bad_key("no_such_key = 1\n");
  CHECK_THROWS_AS(parse_config(bad_key), ConfigError);
  std::istringstream bad_num("num_jobs = many\n");
  CHECK_THROWS_AS(parse_config(bad_num), ConfigError);
  ScenarioConfig off;
  off.peak_start = 119;
  off.peak_duration = 2;
  CHECK_THROWS_AS(off.validate(), ConfigError);
}

TEST_CASE("written configs parse back to the same settings") {
  ScenarioConfig cfg;
  cfg.workload.util = FixedUtil{0.6};
  cfg.peak_multiplier = 30;
  cfg.relax_deadlines = true;
  std::ostringstream out;
  write_config(out, cfg);
  std::istringstream in(out.str());
  std::ostringstream again;
  write_config(again, parse_config(in).scenario);
  CHECK(out.str() == again.str());
}

TEST_CASE("an idle scenario reports the idle baseline") {
  const auto dir = scratch("idle");
  ScenarioConfig cfg;
  cfg.workload.num_jobs = 0;
  cfg.horizon_h = 24;
  cfg.window_h = 24;
  cfg.out_dir = dir.string();
  const auto rows = run_scenario(cfg);
  CHECK(rows.size() == 8);
  for (const auto& r : rows) {
    CHECK(r.metrics.avg_power_kw == doctest::Approx(90.0));
    CHECK(r.metrics.node_occupancy == 0.0);
    CHECK(r.metrics.revenue == 0.0);
    CHECK(r.flexibility_kw == 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("scenario artifacts, determinism and report round trip") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto rows = run_scenario(small_scenario(a));
  run_scenario(small_scenario(b));
  CHECK(rows.size() == 2 * 2 * 2 * 2);

  for (const char* run : {"fifo_flat", "fifo_peak", "milp_flat", "milp_peak"}) {
    for (const char* file : {"timeseries.csv", "summary.json", "schedule.csv"}) {
      const auto rel = fs::path("seed_1") / run / file;
      REQUIRE(fs::exists(a / rel));
      CHECK(slurp(a / rel) == slurp(b / rel));
    }
  }
  CHECK(fs::exists(a / "seed_1" / "milp_peak" / "windows.csv"));
  CHECK(fs::exists(a / "seed_2" / "jobs.csv"));
  CHECK(slurp(a / "comparison.csv") == slurp(b / "comparison.csv"));

  // Flexibility in comparison.csv is what the stored time series give.
  for (auto s : {1, 2}) {
    std::ifstream fd(a / ("seed_" + std::to_string(s)) / "milp_peak" / "timeseries.csv");
    std::ifstream ff(a / ("seed_" + std::to_string(s)) / "milp_flat" / "timeseries.csv");
    const auto dyn = read_timeseries_csv(fd);
    const auto flat = read_timeseries_csv(ff);
    const double flex = flexibility(dyn, flat, small_scenario(a).peak_interval());
    for (const auto& r : rows)
      if (r.seed == static_cast<std::uint64_t>(s) && r.scheduler == SchedulerKind::kMilp &&
          r.price == PriceCase::kPeak)
        CHECK(r.flexibility_kw == doctest::Approx(flex).epsilon(1e-12));
  }

  const auto before = slurp(a / "comparison.csv");
  fs::remove(a / "comparison.csv");
  std::ostringstream log;
  report(a, log);
  CHECK(slurp(a / "comparison.csv") == before);

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("a multiplier of one gives no reduction from price response") {
  const auto dir = scratch("sweep1");
  SweepSpec sweep;
  sweep.axis = "peak_multiplier";
  sweep.values = {"1"};
  sweep.base = small_scenario(dir);
  sweep.base.seeds = {3};
  const auto rows = run_sweep(sweep);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].scheduler == SchedulerKind::kFifo);
  CHECK(rows[1].has_reduction);
  // Flat and peak runs coincide, so the MILP's flexibility is zero.
  std::ifstream in(dir / "point_0" / "comparison.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) CHECK(line.substr(line.rfind(',') + 1) == "0.00");

  const auto before = slurp(dir / "sweep.csv");
  fs::remove(dir / "sweep.csv");
  std::ostringstream log;
  report(dir, log);
  CHECK(slurp(dir / "sweep.csv") == before);
  CHECK(before.rfind("axis_value,scheduler,peak_avg_power_kw,gpu_util,occupancy,revenue,pct_power_reduction_vs_fifo\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("unwritable output is an I/O error") {
  ScenarioConfig cfg = small_scenario("/proc/dcflex_cannot_write_here");
  cfg.seeds = {1};
  CHECK_THROWS_AS(run_scenario(cfg), IoError);
  std::ostringstream log;
  CHECK_THROWS_AS(report("/nonexistent/dcflex", log), IoError);
}

}

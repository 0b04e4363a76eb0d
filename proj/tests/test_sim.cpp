#include <doctest.h>

#include <sstream>
#include <vector>

#include "dcflex/fifo.hpp"
#include "dcflex/sim.hpp"
#include "oracles.hpp"

using namespace dcflex;
using oracle::make_job;

TEST_SUITE("sim") {

TEST_CASE("an empty schedule idles at 90 kW and earns nothing") {
  const DataCenterConfig cfg;
  const auto res = run({}, ScheduleState{}, cfg, PriceSignal::flat(0.45, 120));
  REQUIRE(res.steps.size() == 120);
  for (const auto& s : res.steps) {
    CHECK(s.power_kw == doctest::Approx(90.0));
    CHECK(s.revenue == 0.0);
  }
  const auto m = metrics(res, {}, cfg, Interval{0, 120});
  CHECK(m.node_occupancy == 0.0);
  CHECK(m.avg_power_kw == doctest::Approx(90.0));
  CHECK(m.gpu_util == 0.0);
}

TEST_CASE("one running job") {
  const DataCenterConfig cfg;
  const std::vector<Job> jobs{make_job(0, 0, 2, 5, 20, 0.5)};
  ScheduleState s(1);
  s.start(0, 0, 2);
  const auto res = run(jobs, s, cfg, PriceSignal::flat(0.45, 6));
  for (int t = 0; t < 6; ++t) {
    const auto& st = res.steps[static_cast<std::size_t>(t)];
    CHECK(st.power_kw == doctest::Approx(t < 2 ? 90.0 + 20 * 0.5 * 0.525 : 90.0));
    CHECK(st.revenue == doctest::Approx(t < 2 ? 46.0 : 0.0));
  }
  CHECK(res.steps[0].power_kw == doctest::Approx(95.25));
}

TEST_CASE("an early exit drops back to idle at the actual end") {
  const DataCenterConfig cfg;
  const std::vector<Job> jobs{make_job(0, 0, 5, 1, 4, 1.0, 2)};
  ScheduleState s(1);
  s.start(0, 0, 5);
  const auto res = run(jobs, s, cfg, PriceSignal::flat(0.45, 8));
  CHECK(res.steps[1].power_kw > 90.0);
  CHECK(res.steps[2].power_kw == doctest::Approx(90.0));
  CHECK(res.schedule[0].end == 2);
}

TEST_CASE("utilisation counts every GPU of an occupied node") {
  const DataCenterConfig cfg;
  const std::vector<Job> jobs{make_job(0, 0, 4, 1, 3, 0.6)};
  ScheduleState s(1);
  s.start(0, 0, 4);
  const auto res = run(jobs, s, cfg, PriceSignal::flat(0.45, 4));
  const auto m = metrics(res, jobs, cfg, Interval{0, 4});
  CHECK(m.gpu_util == doctest::Approx(3 * 0.6 / 4));
  CHECK(m.gpu_util == doctest::Approx(0.45));
  CHECK(m.node_occupancy == doctest::Approx(0.01));

  DataCenterConfig small;
  small.num_nodes = 2;
  const std::vector<Job> full{make_job(0, 0, 2, 1, 4, 1.0), make_job(1, 0, 2, 1, 4, 1.0)};
  ScheduleState f(2);
  f.start(0, 0, 2);
  f.start(1, 0, 2);
  const auto m2 = metrics(run(full, f, small, PriceSignal::flat(0.45, 2)), full, small, Interval{0, 2});
  CHECK(m2.gpu_util == doctest::Approx(1.0));
  CHECK(m2.node_occupancy == doctest::Approx(1.0));
}

TEST_CASE("waits are averaged over jobs started in the interval") {
  const DataCenterConfig cfg;
  const std::vector<Job> jobs{make_job(0, 0, 2, 1), make_job(1, 1, 2, 1), make_job(2, 3, 2, 1)};
  ScheduleState s(3);
  s.start(0, 2, 2);
  s.start(1, 2, 2);
  s.start(2, 8, 2);
  const auto res = run(jobs, s, cfg, PriceSignal::flat(0.45, 12));
  CHECK(metrics(res, jobs, cfg, Interval{0, 5}).avg_wait_h == doctest::Approx(1.5));
  CHECK(metrics(res, jobs, cfg, Interval{0, 5}).started_jobs == 2);
  CHECK(metrics(res, jobs, cfg, Interval{0, 12}).avg_wait_h == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("empty intervals and mismatched horizons are errors") {
  const DataCenterConfig cfg;
  const auto a = run({}, ScheduleState{}, cfg, PriceSignal::flat(0.45, 10));
  const auto b = run({}, ScheduleState{}, cfg, PriceSignal::flat(0.45, 12));
  CHECK_THROWS(metrics(a, {}, cfg, Interval{3, 3}));
  CHECK_THROWS(metrics(a, {}, cfg, Interval{5, 11}));
  CHECK_THROWS(flexibility(a, b, Interval{0, 1}));
}

TEST_CASE("capacity overruns are hard failures") {
  DataCenterConfig cfg;
  cfg.num_nodes = 1;
  const std::vector<Job> jobs{make_job(0, 0, 2, 1), make_job(1, 0, 2, 1)};
  ScheduleState s(2);
  s.start(0, 0, 2);
  s.start(1, 1, 2);
  CHECK_THROWS_AS(run(jobs, s, cfg, PriceSignal::flat(0.45, 4)), std::logic_error);
}

TEST_CASE("flexibility") {
  const DataCenterConfig cfg;
  const std::vector<Job> jobs{make_job(0, 0, 4, 2, 8, 1.0)};
  ScheduleState on(1), off(1);
  on.start(0, 0, 4);
  off.start(0, 2, 4);
  const auto prices = PriceSignal::flat(0.45, 8);
  const auto flat = run(jobs, on, cfg, prices);
  const auto dyn = run(jobs, off, cfg, prices);
  CHECK(flexibility(flat, flat, Interval{0, 2}) == 0.0);
  CHECK(flexibility(dyn, flat, Interval{0, 2}) == doctest::Approx(8 * 0.525));
  CHECK(flexibility(dyn.steps, flat.steps, Interval{0, 2}) == doctest::Approx(8 * 0.525));
}

TEST_CASE("energy and revenue add up over the horizon") {
  WorkloadSpec spec;
  spec.seed = 13;
  const auto jobs = generate_workload(spec);
  const DataCenterConfig cfg;
  const auto sched = fifo_execute(jobs, cfg, 120);
  const auto res = run(jobs, sched, cfg, PriceSignal::flat(0.45, 120));
  double energy = 0.0, revenue = 0.0;
  for (const auto& s : res.steps) {
    energy += s.power_kw;
    revenue += s.revenue;
  }
  double active = 0.0, earned = 0.0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!res.schedule[j].scheduled) continue;
    const int ran = *res.schedule[j].end - *res.schedule[j].start;
    CHECK(ran == jobs[j].dur_act);
    active += jobs[j].gpus * jobs[j].util * 0.525 * ran;
    earned += 2.30 * jobs[j].gpus * ran;
  }
  CHECK(energy == doctest::Approx(90.0 * 120 + active).epsilon(1e-12));
  CHECK(revenue == doctest::Approx(earned).epsilon(1e-12));
}

TEST_CASE("steady interval skips the first and last window") {
  CHECK(steady_interval(120, 24) == Interval{24, 96});
  CHECK(steady_interval(48, 24) == Interval{0, 48});
}

TEST_CASE("timeseries.csv round trip") {
  WorkloadSpec spec;
  spec.num_jobs = 30;
  const auto jobs = generate_workload(spec);
  const DataCenterConfig cfg;
  const auto res = run(jobs, fifo_execute(jobs, cfg, 120), cfg, PriceSignal::flat(0.45, 120).with_peak(60, 1, 3.0));
  std::stringstream ss;
  write_timeseries_csv(ss, res);
  CHECK(ss.str().rfind("t,power_kw,occupied_nodes,active_gpus,gpu_util,price,revenue_h\n", 0) == 0);
  const auto back = read_timeseries_csv(ss);
  REQUIRE(back.size() == 120);
  for (std::size_t t = 0; t < 120; ++t) {
    CHECK(back[t].power_kw == doctest::Approx(res.steps[t].power_kw).epsilon(1e-4));
    CHECK(back[t].occupied_nodes == res.steps[t].occupied_nodes);
  }
}

}

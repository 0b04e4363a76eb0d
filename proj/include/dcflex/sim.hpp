#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dcflex/facility.hpp"
#include "dcflex/pricing.hpp"
#include "dcflex/schedule.hpp"
#include "dcflex/workload.hpp"

namespace dcflex {

struct StepRecord {
  int t = 0;
  double power_kw = 0.0;
  int occupied_nodes = 0;
  int active_gpus = 0;
  double gpu_load = 0.0;  // sum of gpus * util over running jobs
  double gpu_util = 0.0;  // gpu_load over GPUs housed in occupied nodes
  double price = 0.0;
  double revenue = 0.0;   // $ accrued this hour
};

struct SimulationResult {
  std::vector<StepRecord> steps;
  ScheduleState schedule;  // ends are actual ends
};

// Half-open hour range [begin, end).
struct Interval {
  int begin = 0;
  int end = 0;
  int length() const { return end - begin; }
  bool operator==(const Interval&) const = default;
};

struct Metrics {
  Interval interval;
  double avg_power_kw = 0.0;
  double gpu_util = 0.0;
  double node_occupancy = 0.0;
  double avg_wait_h = 0.0;
  double revenue = 0.0;
  int started_jobs = 0;  // jobs whose start lies in the interval
};

// Replays a committed schedule hour by hour; job j runs over
// [start, start + dur_act). Throws std::logic_error if the realized
// schedule ever needs more nodes than exist.
SimulationResult run(std::span<const Job> jobs, const ScheduleState& schedule,
                     const DataCenterConfig& cfg, const PriceSignal& prices);

// Hours with nothing running are left out of the utilization mean; an
// interval that is idle throughout reports 0.
Metrics metrics(const SimulationResult& res, std::span<const Job> jobs, const DataCenterConfig& cfg,
                Interval interval);

// Power-only view used when only a persisted time series is at hand.
double average_power(std::span<const StepRecord> steps, Interval interval);

// Positive when the dynamic-price run draws less power in the peak interval
// than the flat-price run of the same scheduler and workload.
double flexibility(std::span<const StepRecord> dynamic, std::span<const StepRecord> flat,
                   Interval peak);
double flexibility(const SimulationResult& dynamic, const SimulationResult& flat, Interval peak);

// "All period" interval: every rolling window except the first and last,
// or the whole horizon when fewer than three windows exist.
Interval steady_interval(int horizon, int window_h);

// timeseries.csv: t,power_kw,occupied_nodes,active_gpus,gpu_util,price,revenue_h
void write_timeseries_csv(std::ostream& out, const SimulationResult& res);
std::vector<StepRecord> read_timeseries_csv(std::istream& in);

// schedule.csv: id,start_h,end_h (empty fields for jobs that never ran)
void write_schedule_csv(std::ostream& out, std::span<const Job> jobs, const ScheduleState& state);

std::string metrics_json(const Metrics& m);

}  // namespace dcflex

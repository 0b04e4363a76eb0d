#include "dcflex/sim.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dcflex/errors.hpp"

namespace dcflex {

namespace {

double round_to(double v, int decimals) {
  const double f = std::pow(10.0, decimals);
  return std::round(v * f) / f;
}

void check_interval(Interval iv, std::size_t horizon) {
  if (iv.length() <= 0) throw ConfigError("empty metrics interval");
  if (iv.begin < 0 || static_cast<std::size_t>(iv.end) > horizon)
    throw ConfigError("metrics interval [" + std::to_string(iv.begin) + ", " +
                      std::to_string(iv.end) + ") exceeds the horizon");
}

}  // namespace

SimulationResult run(std::span<const Job> jobs, const ScheduleState& schedule,
                     const DataCenterConfig& cfg, const PriceSignal& prices) {
  if (schedule.size() != jobs.size()) throw std::invalid_argument("schedule/job count mismatch");
  const int horizon = prices.horizon();
  const double per_gpu = gpu_active_power(cfg);

  SimulationResult res;
  res.schedule = schedule;
  res.steps.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    res.steps[t].t = t;
    res.steps[t].price = prices[static_cast<std::size_t>(t)];
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!schedule[j].scheduled) continue;
    const Job& job = jobs[j];
    const int start = *schedule[j].start;
    const int end = start + job.dur_act;
    res.schedule.set_end(j, end);
    for (int t = std::max(start, 0); t < std::min(end, horizon); ++t) {
      auto& s = res.steps[static_cast<std::size_t>(t)];
      s.occupied_nodes += job.nodes;
      s.active_gpus += job.gpus;
      s.gpu_load += job.gpus * job.util;
      s.revenue += cfg.gpu_hour_price * job.gpus;
    }
  }

  for (auto& s : res.steps) {
    if (s.occupied_nodes > cfg.num_nodes)
      throw std::logic_error("capacity violated at hour " + std::to_string(s.t) + ": " +
                             std::to_string(s.occupied_nodes) + " nodes in use");
    s.power_kw = idle_power(cfg) + s.gpu_load * per_gpu;
    s.gpu_util =
        s.occupied_nodes > 0 ? s.gpu_load / (cfg.gpus_per_node * s.occupied_nodes) : 0.0;
  }
  return res;
}

Metrics metrics(const SimulationResult& res, std::span<const Job> jobs, const DataCenterConfig& cfg,
                Interval interval) {
  check_interval(interval, res.steps.size());
  Metrics m;
  m.interval = interval;
  double util_sum = 0.0;
  int busy_hours = 0;
  for (int t = interval.begin; t < interval.end; ++t) {
    const auto& s = res.steps[static_cast<std::size_t>(t)];
    m.avg_power_kw += s.power_kw;
    m.node_occupancy += static_cast<double>(s.occupied_nodes) / cfg.num_nodes;
    m.revenue += s.revenue;
    if (s.occupied_nodes > 0) {
      util_sum += s.gpu_util;
      ++busy_hours;
    }
  }
  const double hours = interval.length();
  m.avg_power_kw /= hours;
  m.node_occupancy /= hours;
  m.gpu_util = busy_hours > 0 ? util_sum / busy_hours : 0.0;

  double wait = 0.0;
  for (std::size_t j = 0; j < jobs.size() && j < res.schedule.size(); ++j) {
    const auto& slot = res.schedule[j];
    if (!slot.scheduled || *slot.start < interval.begin || *slot.start >= interval.end) continue;
    wait += *slot.start - jobs[j].arrival;
    ++m.started_jobs;
  }
  m.avg_wait_h = m.started_jobs > 0 ? wait / m.started_jobs : 0.0;
  return m;
}

double average_power(std::span<const StepRecord> steps, Interval interval) {
  check_interval(interval, steps.size());
  double sum = 0.0;
  for (int t = interval.begin; t < interval.end; ++t) sum += steps[static_cast<std::size_t>(t)].power_kw;
  return sum / interval.length();
}

double flexibility(std::span<const StepRecord> dynamic, std::span<const StepRecord> flat,
                   Interval peak) {
  if (dynamic.size() != flat.size()) throw ConfigError("flexibility: horizons differ");
  return average_power(flat, peak) - average_power(dynamic, peak);
}

double flexibility(const SimulationResult& dynamic, const SimulationResult& flat, Interval peak) {
  return flexibility(dynamic.steps, flat.steps, peak);
}

Interval steady_interval(int horizon, int window_h) {
  if (window_h >= 1 && horizon > 2 * window_h) return Interval{window_h, horizon - window_h};
  return Interval{0, horizon};
}

void write_timeseries_csv(std::ostream& out, const SimulationResult& res) {
  out << "t,power_kw,occupied_nodes,active_gpus,gpu_util,price,revenue_h\n";
  char buf[200];
  for (const auto& s : res.steps) {
    std::snprintf(buf, sizeof buf, "%d,%.2f,%d,%d,%.4f,%.4f,%.2f\n", s.t, s.power_kw,
                  s.occupied_nodes, s.active_gpus, s.gpu_util, s.price, s.revenue);
    out << buf;
  }
}

std::vector<StepRecord> read_timeseries_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("t,power_kw,occupied_nodes,active_gpus,gpu_util,price,revenue_h", 0) != 0)
    throw IoError("timeseries.csv: unexpected header");
  std::vector<StepRecord> steps;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    StepRecord s;
    char c[6];
    if (!(row >> s.t >> c[0] >> s.power_kw >> c[1] >> s.occupied_nodes >> c[2] >> s.active_gpus >>
          c[3] >> s.gpu_util >> c[4] >> s.price >> c[5] >> s.revenue))
      throw IoError("timeseries.csv: malformed row '" + line + "'");
    steps.push_back(s);
  }
  return steps;
}

void write_schedule_csv(std::ostream& out, std::span<const Job> jobs, const ScheduleState& state) {
  out << "id,start_h,end_h\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    out << jobs[j].id << ',';
    if (state[j].scheduled) out << *state[j].start << ',' << *state[j].end;
    else out << ',';
    out << '\n';
  }
}

std::string metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["interval"] = {m.interval.begin, m.interval.end};
  j["avg_power_kw"] = round_to(m.avg_power_kw, 2);
  j["gpu_util"] = round_to(m.gpu_util, 4);
  j["node_occupancy"] = round_to(m.node_occupancy, 4);
  j["avg_wait_h"] = round_to(m.avg_wait_h, 2);
  j["revenue"] = round_to(m.revenue, 2);
  j["started_jobs"] = m.started_jobs;
  return j.dump();
}

}  // namespace dcflex

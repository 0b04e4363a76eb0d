#pragma once

// Independent re-checks shared by the unit tests and the acceptance run.
// They recompute everything from jobs and schedules directly and do not call
// into the scheduler code paths they verify.

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dcflex/facility.hpp"
#include "dcflex/schedule.hpp"
#include "dcflex/workload.hpp"

namespace oracle {

inline dcflex::Job make_job(int id, int arrival, int dur, int nodes, int gpus = 0, double util = 0.6,
                            int dur_act = 0) {
  dcflex::Job j;
  j.id = id;
  j.arrival = arrival;
  j.dur_est = dur;
  j.dur_act = dur_act > 0 ? dur_act : dur;
  j.nodes = nodes;
  j.gpus = gpus > 0 ? gpus : nodes * 4;
  j.util = util;
  return j;
}

struct Violations {
  int capacity = 0;      // hours where running jobs need more than N nodes
  int arrival = 0;       // jobs started before they arrived
  int double_start = 0;  // jobs with an end but no start, or end before start
  int deadline = 0;      // in-horizon deadlines that were missed
  std::string first;

  int total() const { return capacity + arrival + double_start + deadline; }
};

// Occupancy is the realized run [start, start + dur_act); planned ends in the
// state may overlap where an early exit freed nodes.
inline Violations check_schedule(std::span<const dcflex::Job> jobs, const dcflex::ScheduleState& s,
                                 const dcflex::DataCenterConfig& cfg, int horizon, bool check_deadlines) {
  Violations v;
  std::vector<int> used(static_cast<std::size_t>(horizon), 0);
  auto note = [&](const std::string& what) {
    if (v.first.empty()) v.first = what;
  };
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& slot = s[j];
    const auto& job = jobs[j];
    const int deadline = job.arrival + cfg.max_wait_h;
    if (!slot.scheduled) {
      if (slot.start || slot.end) {
        ++v.double_start;
        note("job " + std::to_string(job.id) + " has times but is not scheduled");
      }
      // A deadline only binds if some start by it could still finish in time.
      if (check_deadlines && !slot.rejected && deadline < horizon && job.arrival + job.dur_est <= horizon) {
        ++v.deadline;
        note("job " + std::to_string(job.id) + " never started");
      }
      continue;
    }
    if (!slot.start || !slot.end || *slot.end <= *slot.start) {
      ++v.double_start;
      note("job " + std::to_string(job.id) + " has an inconsistent slot");
      continue;
    }
    if (*slot.start < job.arrival) {
      ++v.arrival;
      note("job " + std::to_string(job.id) + " starts before arrival");
    }
    if (check_deadlines && deadline < horizon && *slot.start > deadline) {
      ++v.deadline;
      note("job " + std::to_string(job.id) + " starts after its deadline");
    }
    for (int t = *slot.start; t < *slot.start + job.dur_act && t < horizon; ++t) used[static_cast<std::size_t>(t)] += job.nodes;
  }
  for (int t = 0; t < horizon; ++t)
    if (used[static_cast<std::size_t>(t)] > cfg.num_nodes) {
      ++v.capacity;
      note("hour " + std::to_string(t) + " uses " + std::to_string(used[static_cast<std::size_t>(t)]) + " nodes");
    }
  return v;
}

// Small random job lists for FIFO property checks.
inline std::vector<dcflex::Job> random_jobs(std::mt19937_64& rng, int n, int capacity, int span) {
  std::uniform_int_distribution<int> arr(0, span - 1), dur(1, 6), nodes(1, capacity);
  std::vector<dcflex::Job> jobs;
  for (int i = 0; i < n; ++i) jobs.push_back(make_job(i, arr(rng), 0, 0));
  std::stable_sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
  for (int i = 0; i < n; ++i) {
    auto& j = jobs[static_cast<std::size_t>(i)];
    j.id = i;
    j.dur_est = j.dur_act = dur(rng);
    j.nodes = nodes(rng);
    j.gpus = 4 * j.nodes;
  }
  return jobs;
}

}  // namespace oracle

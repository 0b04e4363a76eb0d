#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dcflex/facility.hpp"
#include "dcflex/schedule.hpp"
#include "dcflex/workload.hpp"

namespace dcflex {

// Free node count per hour over the planning horizon.
class CapacityTimeline {
 public:
  CapacityTimeline(int capacity, int horizon);

  int capacity() const { return capacity_; }
  int horizon() const { return static_cast<int>(free_.size()); }
  int free_at(int t) const { return free_.at(static_cast<std::size_t>(t)); }
  std::span<const int> free_nodes() const { return free_; }

  // True if `nodes` are free for every hour of [start, start + duration)
  // that lies inside the horizon.
  bool fits(int start, int nodes, int duration) const;

  // Earliest s in [earliest, latest] with fits(s, nodes, duration).
  std::optional<int> earliest_fit(int earliest, int latest, int nodes, int duration) const;

  // Claims the nodes over [start, start + duration) clipped to the horizon.
  // Throws std::logic_error on overcommit.
  void reserve(int start, int nodes, int duration);

 private:
  int capacity_;
  std::vector<int> free_;
};

// Conservative backfilling: jobs are placed in (arrival, id) order, each at
// the earliest start where its nodes stay free for its estimated duration
// given all earlier reservations. Jobs that cannot finish inside the horizon
// stay unscheduled; jobs larger than the facility are rejected.
ScheduleState fifo_backfill(std::span<const Job> jobs, const DataCenterConfig& cfg, int horizon);

// Executes the FIFO plan with early terminations: whenever a job ends before
// its estimate, every job that has not started yet is re-placed against a
// timeline rebuilt from the still-running jobs. Returned ends are actual ends.
ScheduleState fifo_execute(std::span<const Job> jobs, const DataCenterConfig& cfg, int horizon);

}  // namespace dcflex

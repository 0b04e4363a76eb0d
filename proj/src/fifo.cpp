#include "dcflex/fifo.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dcflex {

namespace {

std::vector<std::size_t> arrival_order(std::span<const Job> jobs) {
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (jobs[a].arrival != jobs[b].arrival) return jobs[a].arrival < jobs[b].arrival;
    return jobs[a].id < jobs[b].id;
  });
  return order;
}

// Places every job in `order` that is not already fixed in `state`, no
// earlier than `not_before`.
void place_in_order(std::span<const Job> jobs, std::span<const std::size_t> order,
                    CapacityTimeline& timeline, ScheduleState& state, int not_before) {
  const int horizon = timeline.horizon();
  for (std::size_t j : order) {
    if (state[j].scheduled || state[j].rejected) continue;
    const Job& job = jobs[j];
    if (job.nodes > timeline.capacity()) {
      state.reject(j);
      continue;
    }
    const int earliest = std::max(job.arrival, not_before);
    const auto s = timeline.earliest_fit(earliest, horizon - job.dur_est, job.nodes, job.dur_est);
    if (!s) continue;
    timeline.reserve(*s, job.nodes, job.dur_est);
    state.start(j, *s, job.dur_est);
  }
}

}  // namespace

CapacityTimeline::CapacityTimeline(int capacity, int horizon)
    : capacity_(capacity), free_(static_cast<std::size_t>(std::max(horizon, 0)), capacity) {}

bool CapacityTimeline::fits(int start, int nodes, int duration) const {
  const int stop = std::min(start + duration, horizon());
  for (int t = std::max(start, 0); t < stop; ++t)
    if (free_[static_cast<std::size_t>(t)] < nodes) return false;
  return true;
}

std::optional<int> CapacityTimeline::earliest_fit(int earliest, int latest, int nodes,
                                                  int duration) const {
  if (nodes > capacity_) return std::nullopt;
  int s = std::max(earliest, 0);
  while (s <= latest) {
    // Jump past the last blocking hour instead of sliding one step.
    int blocked = -1;
    const int stop = std::min(s + duration, horizon());
    for (int t = stop - 1; t >= s; --t)
      if (free_[static_cast<std::size_t>(t)] < nodes) {
        blocked = t;
        break;
      }
    if (blocked < 0) return s;
    s = blocked + 1;
  }
  return std::nullopt;
}

void CapacityTimeline::reserve(int start, int nodes, int duration) {
  const int stop = std::min(start + duration, horizon());
  for (int t = std::max(start, 0); t < stop; ++t) {
    auto& f = free_[static_cast<std::size_t>(t)];
    if (f < nodes) throw std::logic_error("capacity timeline overcommitted");
    f -= nodes;
  }
}

ScheduleState fifo_backfill(std::span<const Job> jobs, const DataCenterConfig& cfg, int horizon) {
  ScheduleState state(jobs.size());
  CapacityTimeline timeline(cfg.num_nodes, horizon);
  const auto order = arrival_order(jobs);
  place_in_order(jobs, order, timeline, state, 0);
  return state;
}

ScheduleState fifo_execute(std::span<const Job> jobs, const DataCenterConfig& cfg, int horizon) {
  ScheduleState state = fifo_backfill(jobs, cfg, horizon);
  const auto order = arrival_order(jobs);

  for (int t = 1; t < horizon; ++t) {
    bool early_exit = false;
    for (std::size_t j = 0; j < jobs.size() && !early_exit; ++j)
      early_exit = state[j].scheduled && *state[j].start + jobs[j].dur_act == t &&
                   jobs[j].terminates_early();
    if (!early_exit) continue;

    // Running jobs keep their estimated end; finished jobs hold nothing.
    CapacityTimeline timeline(cfg.num_nodes, horizon);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (!state[j].scheduled) continue;
      const int s = *state[j].start;
      if (s >= t) {
        state.unschedule(j);
        continue;
      }
      if (s + jobs[j].dur_act > t) timeline.reserve(t, jobs[j].nodes, s + jobs[j].dur_est - t);
    }
    place_in_order(jobs, order, timeline, state, t);
  }

  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (state[j].scheduled) state.set_end(j, *state[j].start + jobs[j].dur_act);
  return state;
}

}  // namespace dcflex
